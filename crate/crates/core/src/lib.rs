//! Volumetric tooth segmentation toolkit.
//!
//! * [`volume`]: volumes, spacing, thresholding, surface extraction.
//! * [`io`]: native `.ctvol` volumes, read-only NIfTI-1, JSON/CSV reports.
//! * [`preprocess`]: per-slice CLAHE, `[0, 1]` normalization, axial resize.
//! * [`metrics`]: DSC, WDSC, IoU, SEN, PPV, HD, ASSD, SO, SD.
//! * [`loss`]: weighted two-term dice loss and its gradient.
//! * [`nn`]: forward pass of the residual encoder / attention bottleneck /
//!   decoder network with deep-supervision heads.
//! * [`phantom`]: synthetic jaw volumes with exact labels.

pub mod error;
pub mod io;
pub mod loss;
pub mod metrics;
pub mod nn;
pub mod phantom;
pub mod preprocess;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{Dims, Spacing, SurfacePointSet, Volume, VolumeKind};
