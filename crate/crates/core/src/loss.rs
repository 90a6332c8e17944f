//! Two-term (foreground + background) soft dice and the weighted dice
//! training loss, with its closed-form gradient.
//!
//! With `A = 2 Σ p r + ε`, `B = Σ (p + r) + ε`, `C = 2 Σ (1-p)(1-r) + ε` and
//! `E = Σ (2 - p - r) + ε`:
//!
//! ```text
//! fg = A / B        bg = C / E        L = 1 - (w1 fg + w2 bg)
//! ∂L/∂p_n = -w1 (2 r_n B - A) / B²  -  w2 (C - 2 (1 - r_n) E) / E²
//! ```
//!
//! All sums are accumulated in `f64` in voxel order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::check_weights;
use crate::volume::{Volume, VolumeKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub w1: f64,
    pub w2: f64,
    pub epsilon: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            w1: 0.1,
            w2: 0.9,
            epsilon: 1e-6,
        }
    }
}

impl LossConfig {
    /// `epsilon = 0` is accepted; a zero denominator then surfaces as an error.
    pub fn new(w1: f64, w2: f64, epsilon: f64) -> Result<Self> {
        let cfg = Self { w1, w2, epsilon };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_weights(self.w1, self.w2)?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {} must be finite and >= 0",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossValue {
    pub total: f64,
    pub fg_dice: f64,
    pub bg_dice: f64,
}

/// The two dice ratios and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiceTerms {
    pub fg: f64,
    pub bg: f64,
    pub sum: f64,
}

#[derive(Debug, Clone, Copy)]
struct Sums {
    fg_num: f64,
    fg_den: f64,
    bg_num: f64,
    bg_den: f64,
}

fn sums(p: &[f64], r: &[f64], epsilon: f64) -> Result<Sums> {
    let (mut pr, mut p_plus_r, mut qs, mut q_plus_s) = (0.0, 0.0, 0.0, 0.0);
    for (&pn, &rn) in p.iter().zip(r) {
        pr += pn * rn;
        p_plus_r += pn + rn;
        qs += (1.0 - pn) * (1.0 - rn);
        q_plus_s += 2.0 - pn - rn;
    }
    let s = Sums {
        fg_num: 2.0 * pr + epsilon,
        fg_den: p_plus_r + epsilon,
        bg_num: 2.0 * qs + epsilon,
        bg_den: q_plus_s + epsilon,
    };
    if s.fg_den == 0.0 {
        return Err(Error::UndefinedMetric("foreground dice (empty prediction and label, epsilon = 0)"));
    }
    if s.bg_den == 0.0 {
        return Err(Error::UndefinedMetric("background dice (full prediction and label, epsilon = 0)"));
    }
    Ok(s)
}

fn check_inputs(p: &Volume, r: &Volume) -> Result<()> {
    p.require_kind(VolumeKind::Probability)?;
    r.require_kind(VolumeKind::Label)?;
    p.require_same_dims(r)
}

/// Slice-level form of [`elementwise_dsc`]; `p` and `r` must have equal length.
pub fn dice_terms(p: &[f64], r: &[f64], epsilon: f64) -> Result<DiceTerms> {
    if p.len() != r.len() {
        return Err(Error::Shape(format!("{} predictions vs {} labels", p.len(), r.len())));
    }
    let s = sums(p, r, epsilon)?;
    let fg = s.fg_num / s.fg_den;
    let bg = s.bg_num / s.bg_den;
    Ok(DiceTerms { fg, bg, sum: fg + bg })
}

pub fn elementwise_dsc(p: &Volume, r: &Volume, epsilon: f64) -> Result<DiceTerms> {
    check_inputs(p, r)?;
    dice_terms(p.data(), r.data(), epsilon)
}

pub fn loss_value(p: &[f64], r: &[f64], cfg: &LossConfig) -> Result<LossValue> {
    cfg.validate()?;
    let t = dice_terms(p, r, cfg.epsilon)?;
    Ok(LossValue {
        total: 1.0 - (cfg.w1 * t.fg + cfg.w2 * t.bg),
        fg_dice: t.fg,
        bg_dice: t.bg,
    })
}

pub fn weighted_dice_loss(p: &Volume, r: &Volume, cfg: &LossConfig) -> Result<LossValue> {
    check_inputs(p, r)?;
    loss_value(p.data(), r.data(), cfg)
}

/// `∂L/∂p_n` for every voxel.
pub fn gradient(p: &[f64], r: &[f64], cfg: &LossConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if p.len() != r.len() {
        return Err(Error::Shape(format!("{} predictions vs {} labels", p.len(), r.len())));
    }
    let s = sums(p, r, cfg.epsilon)?;
    let b2 = s.fg_den * s.fg_den;
    let e2 = s.bg_den * s.bg_den;
    Ok(r
        .iter()
        .map(|&rn| {
            let d_fg = (2.0 * rn * s.fg_den - s.fg_num) / b2;
            let d_bg = (s.bg_num - 2.0 * (1.0 - rn) * s.bg_den) / e2;
            -cfg.w1 * d_fg - cfg.w2 * d_bg
        })
        .collect())
}

/// Gradient as an intensity volume on the prediction's grid.
pub fn loss_gradient(p: &Volume, r: &Volume, cfg: &LossConfig) -> Result<Volume> {
    check_inputs(p, r)?;
    let g = gradient(p.data(), r.data(), cfg)?;
    p.map_data(VolumeKind::Intensity, g)
}
