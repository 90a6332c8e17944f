//! Overlap and surface-distance evaluation metrics.
//!
//! Every distance is physical (millimeters), using the volume's anisotropic
//! spacing.

mod case;
mod distance;
mod edt;
mod kdtree;
mod overlap;
mod surface;

pub use case::{evaluate_case, EvalConfig, CONVENTIONS};
pub use distance::{point_to_set_distances, DistanceMethod};
pub use edt::squared_edt;
pub use kdtree::KdTree;
pub use overlap::{check_weights, overlap_metrics, OverlapMetrics};
pub use surface::{
    assd, hausdorff, hausdorff_with, surface_dice, surface_overlap, HausdorffMode, SurfaceDistances,
};
