use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::loss::{loss_value, LossConfig};

use super::attention::{Attention, AttentionKind};
use super::init::Initializer;
use super::ops::{maxpool3d, resize_trilinear, sigmoid, upsample3d, Conv3d};
use super::reb::{conv_norm_relu, Params, Reb};
use super::tensor::Tensor5;

pub const NUM_ENCODERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelConfig {
    pub in_channels: usize,
    pub base_channels: usize,
    pub num_encoders: usize,
    pub attention: AttentionKind,
    pub ds_heads: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            in_channels: 1,
            base_channels: 8,
            num_encoders: NUM_ENCODERS,
            attention: AttentionKind::default(),
            ds_heads: true,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.in_channels != 1 {
            return Err(Error::InvalidParameter(format!(
                "in_channels must be 1, got {}",
                self.in_channels
            )));
        }
        if self.base_channels == 0 {
            return Err(Error::InvalidParameter("base_channels must be positive".into()));
        }
        if self.num_encoders != NUM_ENCODERS {
            return Err(Error::InvalidParameter(format!(
                "num_encoders must be {NUM_ENCODERS}, got {}",
                self.num_encoders
            )));
        }
        Ok(())
    }

    /// Spatial dims must survive this many halvings.
    pub fn divisor(&self) -> usize {
        1 << self.num_encoders
    }

    fn width(&self, level: usize) -> usize {
        self.base_channels << level
    }
}

/// Upsample, concatenate the skip, then two conv -> norm -> relu stages.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderBlock {
    pub conv1: Conv3d,
    pub conv2: Conv3d,
}

impl DecoderBlock {
    fn init(init: &mut Initializer, in_channels: usize, out_channels: usize) -> Result<Self> {
        Ok(Self {
            conv1: init.conv(out_channels, in_channels, 3)?,
            conv2: init.conv(out_channels, out_channels, 3)?,
        })
    }

    pub fn forward(&self, x: &Tensor5, skip: &Tensor5) -> Result<Tensor5> {
        let cat = upsample3d(x, 2)?.concat_channels(skip)?;
        conv_norm_relu(&conv_norm_relu(&cat, &self.conv1)?, &self.conv2)
    }
}

impl Params for DecoderBlock {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.conv1.visit(f);
        self.conv2.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.conv1.visit_mut(f);
        self.conv2.visit_mut(f);
    }
}

/// All weights of one network, tied to the config they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    config: ModelConfig,
    pub encoders: Vec<Reb>,
    pub bottleneck: Reb,
    pub attention: Option<Attention>,
    /// Deepest first.
    pub decoders: Vec<DecoderBlock>,
    pub head: Conv3d,
    /// One 1x1x1 head per decoder stage except the last.
    pub ds_heads: Vec<Conv3d>,
}

impl ModelParams {
    /// Kaiming-initialized parameters drawn from one stream seeded by
    /// `cfg.seed`, in construction order.
    pub fn init(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let mut init = Initializer::new(cfg.seed);
        let mut encoders = Vec::with_capacity(cfg.num_encoders);
        let mut cin = cfg.in_channels;
        for level in 0..cfg.num_encoders {
            encoders.push(Reb::init(&mut init, cin, cfg.width(level))?);
            cin = cfg.width(level);
        }
        let deep = cfg.width(cfg.num_encoders - 1);
        let bottleneck = Reb::init(&mut init, deep, deep)?;
        let attention = Attention::init(cfg.attention, deep, &mut init)?;

        let mut decoders = Vec::with_capacity(cfg.num_encoders);
        let mut below = deep;
        for level in (0..cfg.num_encoders).rev() {
            let out = cfg.width(level.saturating_sub(1));
            decoders.push(DecoderBlock::init(&mut init, below + cfg.width(level), out)?);
            below = out;
        }
        let head = init.conv(1, below, 1)?;
        let mut ds_heads = Vec::new();
        if cfg.ds_heads {
            for d in &decoders[..decoders.len() - 1] {
                ds_heads.push(init.conv(1, d.conv2.out_channels, 1)?);
            }
        }
        Ok(Self {
            config: *cfg,
            encoders,
            bottleneck,
            attention,
            decoders,
            head,
            ds_heads,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Every parameter in visiting order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        self.visit(&mut |p| out.extend_from_slice(p));
        out
    }

    /// Rebuilds parameters for `cfg` from a [`ModelParams::to_flat`] vector.
    pub fn from_flat(cfg: &ModelConfig, values: &[f64]) -> Result<Self> {
        let mut params = Self::init(cfg)?;
        let expected = params.param_count();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "parameter vector has {} values, configuration needs {expected}",
                values.len()
            )));
        }
        let mut pos = 0;
        params.visit_mut(&mut |p| {
            p.copy_from_slice(&values[pos..pos + p.len()]);
            pos += p.len();
        });
        Ok(params)
    }
}

impl Params for ModelParams {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.encoders.visit(f);
        self.bottleneck.visit(f);
        self.attention.visit(f);
        self.decoders.visit(f);
        self.head.visit(f);
        self.ds_heads.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.encoders.visit_mut(f);
        self.bottleneck.visit_mut(f);
        self.attention.visit_mut(f);
        self.decoders.visit_mut(f);
        self.head.visit_mut(f);
        self.ds_heads.visit_mut(f);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelOutput {
    /// `(B, 1, D, H, W)` probabilities.
    pub main: Tensor5,
    /// Deep-supervision maps at full resolution, deepest first.
    pub aux: Vec<Tensor5>,
}

impl ModelOutput {
    /// SHA-256 over the main map followed by every auxiliary map.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        self.main.feed(&mut hasher);
        for a in &self.aux {
            a.feed(&mut hasher);
        }
        hex::encode(hasher.finalize())
    }

    /// Weighted sum of the loss over main and auxiliary maps against a
    /// `(B, 1, D, H, W)` label. `weights` defaults to equal weights summing to 1.
    pub fn supervised_loss(&self, label: &Tensor5, cfg: &LossConfig, weights: Option<&[f64]>) -> Result<f64> {
        let maps: Vec<&Tensor5> = std::iter::once(&self.main).chain(&self.aux).collect();
        let equal = vec![1.0 / maps.len() as f64; maps.len()];
        let weights = weights.unwrap_or(&equal);
        if weights.len() != maps.len() {
            return Err(Error::InvalidParameter(format!(
                "{} supervision weights for {} outputs",
                weights.len(),
                maps.len()
            )));
        }
        let mut total = 0.0;
        for (map, w) in maps.iter().zip(weights) {
            if map.shape() != label.shape() {
                return Err(Error::Shape(format!(
                    "output {:?} vs label {:?}",
                    map.shape(),
                    label.shape()
                )));
            }
            total += w * loss_value(map.data(), label.data(), cfg)?.total;
        }
        Ok(total)
    }
}

pub fn model_forward(x: &Tensor5, cfg: &ModelConfig, params: &ModelParams) -> Result<ModelOutput> {
    cfg.validate()?;
    if params.config() != cfg {
        return Err(Error::InvalidParameter(
            "parameters were not initialized for this model configuration".into(),
        ));
    }
    let [b, c, d, h, w] = x.shape();
    if c != cfg.in_channels {
        return Err(Error::Shape(format!(
            "model expects {} input channel(s), got {c}",
            cfg.in_channels
        )));
    }
    let k = cfg.divisor();
    if b == 0 || d == 0 || h == 0 || w == 0 || d % k != 0 || h % k != 0 || w % k != 0 {
        return Err(Error::Shape(format!(
            "spatial dims {d}x{h}x{w} must be positive multiples of {k}"
        )));
    }

    let mut skips = Vec::with_capacity(cfg.num_encoders);
    let mut cur = x.clone();
    for reb in &params.encoders {
        let e = reb.forward(&cur)?;
        cur = maxpool3d(&e, 2)?;
        skips.push(e);
    }

    let bottleneck = params.bottleneck.forward(&cur)?;
    let mut cur = match &params.attention {
        Some(a) => bottleneck.add(&a.forward(&cur, Some(&bottleneck))?)?,
        None => bottleneck,
    };

    let mut stages = Vec::with_capacity(params.decoders.len());
    for (dec, skip) in params.decoders.iter().zip(skips.iter().rev()) {
        cur = dec.forward(&cur, skip)?;
        stages.push(cur.clone());
    }

    let main = sigmoid(&params.head.forward(&cur)?);
    let aux = params
        .ds_heads
        .iter()
        .zip(&stages)
        .map(|(head, stage)| resize_trilinear(&sigmoid(&head.forward(stage)?), [d, h, w]))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelOutput { main, aux })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(n: usize, seed: u64) -> Tensor5 {
        let len = n * n * n;
        let data = (0..len)
            .map(|i| ((i as u64 * 40503 + seed * 7919) % 1024) as f64 / 1023.0)
            .collect();
        Tensor5::new([1, 1, n, n, n], data).unwrap()
    }

    fn cfg(attention: AttentionKind) -> ModelConfig {
        ModelConfig {
            attention,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn shapes_and_range() {
        let c = cfg(AttentionKind::None);
        let p = ModelParams::init(&c).unwrap();
        let out = model_forward(&input(16, 1), &c, &p).unwrap();
        assert_eq!(out.main.shape(), [1, 1, 16, 16, 16]);
        assert_eq!(out.aux.len(), 2);
        for map in std::iter::once(&out.main).chain(&out.aux) {
            assert_eq!(map.shape(), [1, 1, 16, 16, 16]);
            assert!(map.data().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn deterministic() {
        let c = cfg(AttentionKind::Se);
        let x = input(8, 2);
        let a = model_forward(&x, &c, &ModelParams::init(&c).unwrap()).unwrap();
        let b = model_forward(&x, &c, &ModelParams::init(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.digest(), b.digest());
    }

    #[test]
    fn without_ds_heads() {
        let c = ModelConfig {
            ds_heads: false,
            attention: AttentionKind::Gate,
            ..ModelConfig::default()
        };
        let out = model_forward(&input(8, 0), &c, &ModelParams::init(&c).unwrap()).unwrap();
        assert!(out.aux.is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = cfg(AttentionKind::None);
        let p = ModelParams::init(&c).unwrap();
        let odd = Tensor5::zeros([1, 1, 12, 16, 16]);
        assert!(model_forward(&odd, &c, &p).is_err());
        let other = cfg(AttentionKind::Se);
        assert!(model_forward(&input(8, 0), &other, &p).is_err());
        let bad = ModelConfig {
            num_encoders: 4,
            ..ModelConfig::default()
        };
        assert!(ModelParams::init(&bad).is_err());
    }

    #[test]
    fn flat_round_trip() {
        let c = cfg(AttentionKind::Danet);
        let p = ModelParams::init(&c).unwrap();
        let flat = p.to_flat();
        assert_eq!(ModelParams::from_flat(&c, &flat).unwrap(), p);
        assert!(ModelParams::from_flat(&c, &flat[1..]).is_err());
    }

    #[test]
    fn supervised_loss_uses_equal_weights() {
        let c = cfg(AttentionKind::None);
        let out = model_forward(&input(8, 3), &c, &ModelParams::init(&c).unwrap()).unwrap();
        let label = Tensor5::zeros([1, 1, 8, 8, 8]);
        let lc = LossConfig::default();
        let equal = out.supervised_loss(&label, &lc, None).unwrap();
        let explicit = out.supervised_loss(&label, &lc, Some(&[1.0 / 3.0; 3])).unwrap();
        assert_eq!(equal, explicit);
        assert!(out.supervised_loss(&label, &lc, Some(&[1.0])).is_err());
    }
}
