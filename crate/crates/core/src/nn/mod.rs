//! Forward-only residual encoder / attention bottleneck / decoder network
//! at toy scale, on `f64` tensors.

mod attention;
mod init;
mod model;
mod ops;
mod reb;
mod tensor;

pub use attention::{
    attention_forward, Attention, AttentionKind, AttentionTrace, CbamParams, DanetParams, GateParams, PolarParams,
    SeParams, SkParams,
};
pub use init::{fan_in, kaiming_init, Initializer};
pub use model::{model_forward, DecoderBlock, ModelConfig, ModelOutput, ModelParams, NUM_ENCODERS};
pub use ops::{
    conv3d, global_avg_pool, global_max_pool, instance_norm, maxpool3d, relu, resize_trilinear, sigmoid,
    sigmoid_scalar, softmax_in_place, upsample3d, Conv3d, Linear, INSTANCE_NORM_EPS,
};
pub use reb::{conv_norm_relu, Params, Reb, REB_DEPTH};
pub use tensor::Tensor5;
