//! Surface-distance metrics between a reference surface `S_R` and a
//! predicted surface `S_P`.

use crate::error::{Error, Result};
use crate::volume::SurfacePointSet;

use super::distance::{point_to_set_distances, DistanceMethod};

/// How the two directed Hausdorff maxima are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HausdorffMode {
    /// `max(h(R, P), h(P, R))`.
    #[default]
    Symmetric,
    /// `h(R, P) + h(P, R)`, the sum form printed in some references.
    LiteralSum,
}

impl HausdorffMode {
    pub fn name(self) -> &'static str {
        match self {
            HausdorffMode::Symmetric => "symmetric",
            HausdorffMode::LiteralSum => "literal-sum",
        }
    }
}

/// Nearest-surface distances in both directions, computed once and shared by
/// all surface metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDistances {
    /// `d(r, S_P)` for every `r` in `S_R`.
    pub ref_to_pred: Vec<f64>,
    /// `d(p, S_R)` for every `p` in `S_P`.
    pub pred_to_ref: Vec<f64>,
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(0.0, f64::max)
}

/// Sequential left-to-right sum, so results do not depend on scheduling.
fn sum_of(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, &v| acc + v)
}

fn within(values: &[f64], theta: f64) -> usize {
    values.iter().filter(|&&d| d <= theta).count()
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("theta {theta} must be a positive distance")))
    }
}

impl SurfaceDistances {
    pub fn compute(sr: &SurfacePointSet, sp: &SurfacePointSet, method: DistanceMethod) -> Result<Self> {
        if sr.is_empty() {
            return Err(Error::UndefinedMetric("reference surface"));
        }
        if sp.is_empty() {
            return Err(Error::UndefinedMetric("predicted surface"));
        }
        Ok(Self {
            ref_to_pred: point_to_set_distances(sr, sp, method)?,
            pred_to_ref: point_to_set_distances(sp, sr, method)?,
        })
    }

    pub fn hausdorff(&self, mode: HausdorffMode) -> f64 {
        let a = max_of(&self.ref_to_pred);
        let b = max_of(&self.pred_to_ref);
        match mode {
            HausdorffMode::Symmetric => a.max(b),
            HausdorffMode::LiteralSum => a + b,
        }
    }

    pub fn assd(&self) -> f64 {
        let total = sum_of(&self.ref_to_pred) + sum_of(&self.pred_to_ref);
        total / (self.ref_to_pred.len() + self.pred_to_ref.len()) as f64
    }

    /// Fraction of predicted surface points within `theta` of the reference.
    /// `d == theta` counts as overlapping.
    pub fn overlap(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        Ok(within(&self.pred_to_ref, theta) as f64 / self.pred_to_ref.len() as f64)
    }

    /// Dice over θ-overlapping surface points of both surfaces.
    pub fn dice(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        let hits = within(&self.pred_to_ref, theta) + within(&self.ref_to_pred, theta);
        Ok(hits as f64 / (self.pred_to_ref.len() + self.ref_to_pred.len()) as f64)
    }
}

/// Symmetric Hausdorff distance.
pub fn hausdorff(sr: &SurfacePointSet, sp: &SurfacePointSet) -> Result<f64> {
    hausdorff_with(sr, sp, DistanceMethod::default(), HausdorffMode::default())
}

pub fn hausdorff_with(
    sr: &SurfacePointSet,
    sp: &SurfacePointSet,
    method: DistanceMethod,
    mode: HausdorffMode,
) -> Result<f64> {
    Ok(SurfaceDistances::compute(sr, sp, method)?.hausdorff(mode))
}

/// Average symmetric surface distance.
pub fn assd(sr: &SurfacePointSet, sp: &SurfacePointSet) -> Result<f64> {
    Ok(SurfaceDistances::compute(sr, sp, DistanceMethod::default())?.assd())
}

/// Surface overlap of the predicted surface `sp` against `sr`.
pub fn surface_overlap(sp: &SurfacePointSet, sr: &SurfacePointSet, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    SurfaceDistances::compute(sr, sp, DistanceMethod::default())?.overlap(theta)
}

pub fn surface_dice(sr: &SurfacePointSet, sp: &SurfacePointSet, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    SurfaceDistances::compute(sr, sp, DistanceMethod::default())?.dice(theta)
}
