//! Voxel-overlap metrics from confusion counts.

use crate::error::{Error, Result};
use crate::volume::{confusion_counts, Confusion, Volume};

/// Overlap metrics as fractions in `[0, 1]`. `None` marks a metric whose
/// denominator is zero for this case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapMetrics {
    pub dsc: Option<f64>,
    pub wdsc: Option<f64>,
    pub iou: Option<f64>,
    pub sen: Option<f64>,
    pub ppv: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Checks `w1, w2 >= 0` and `w1 + w2 == 1` (to 1e-9).
pub fn check_weights(w1: f64, w2: f64) -> Result<()> {
    if w1 >= 0.0 && w2 >= 0.0 && (w1 + w2 - 1.0).abs() <= 1e-9 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "weights w1={w1}, w2={w2} must be nonnegative and sum to 1"
        )))
    }
}

impl OverlapMetrics {
    pub fn from_confusion(c: &Confusion, w1: f64, w2: f64) -> Result<Self> {
        check_weights(w1, w2)?;
        let dsc = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
        // dice of the complements
        let dsc_bg = ratio(2 * c.tn, 2 * c.tn + c.fp + c.fn_);
        Ok(Self {
            dsc,
            wdsc: dsc.zip(dsc_bg).map(|(fg, bg)| w1 * fg + w2 * bg),
            iou: ratio(c.tp, c.tp + c.fp + c.fn_),
            sen: ratio(c.tp, c.tp + c.fn_),
            ppv: ratio(c.tp, c.tp + c.fp),
        })
    }
}

/// DSC, weighted DSC, IoU, sensitivity and precision of label `p` against label `r`.
pub fn overlap_metrics(p: &Volume, r: &Volume, w1: f64, w2: f64) -> Result<OverlapMetrics> {
    OverlapMetrics::from_confusion(&confusion_counts(p, r)?, w1, w2)
}
