use crate::error::{Error, Result};
use crate::io::CaseReport;
use crate::volume::{extract_surface, threshold_prob, Volume, VolumeKind};

use super::distance::DistanceMethod;
use super::overlap::{check_weights, overlap_metrics};
use super::surface::{HausdorffMode, SurfaceDistances};

/// Conventions embedded in every report.
pub const CONVENTIONS: &str = "surface=6-connected boundary voxels; distances in mm; \
overlap when d<=theta; wdsc=w1*dice_fg+w2*dice_bg; sd=dice of theta-overlapping surface points";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub threshold: f64,
    pub theta_mm: f64,
    pub w1: f64,
    pub w2: f64,
    pub method: DistanceMethod,
    pub hd_mode: HausdorffMode,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            theta_mm: 1.0,
            w1: 0.1,
            w2: 0.9,
            method: DistanceMethod::Accelerated,
            hd_mode: HausdorffMode::Symmetric,
        }
    }
}

fn pct(v: Option<f64>) -> Option<f64> {
    v.map(|x| 100.0 * x)
}

/// Thresholds the prediction, extracts both surfaces and computes all nine
/// metrics. Metrics that are undefined for this case are `None`.
pub fn evaluate_case(case_id: &str, p: &Volume, r: &Volume, cfg: &EvalConfig) -> Result<CaseReport> {
    p.require_kind(VolumeKind::Probability)?;
    r.require_kind(VolumeKind::Label)?;
    p.require_same_dims(r)?;
    if p.spacing() != r.spacing() {
        return Err(Error::SpacingMismatch {
            left: p.spacing().as_array(),
            right: r.spacing().as_array(),
        });
    }
    check_weights(cfg.w1, cfg.w2)?;
    if !(cfg.theta_mm > 0.0 && cfg.theta_mm.is_finite()) {
        return Err(Error::InvalidParameter(format!("theta {} must be > 0", cfg.theta_mm)));
    }

    let mask = threshold_prob(p, cfg.threshold)?;
    let overlap = overlap_metrics(&mask, r, cfg.w1, cfg.w2)?;
    let sp = extract_surface(&mask)?;
    let sr = extract_surface(r)?;
    let (hd, assd, so, sd) = if sp.is_empty() || sr.is_empty() {
        (None, None, None, None)
    } else {
        let d = SurfaceDistances::compute(&sr, &sp, cfg.method)?;
        (
            Some(d.hausdorff(cfg.hd_mode)),
            Some(d.assd()),
            Some(d.overlap(cfg.theta_mm)?),
            Some(d.dice(cfg.theta_mm)?),
        )
    };
    Ok(CaseReport {
        case_id: case_id.to_owned(),
        wdsc: pct(overlap.wdsc),
        dsc: pct(overlap.dsc),
        iou: pct(overlap.iou),
        sen: pct(overlap.sen),
        ppv: pct(overlap.ppv),
        hd,
        assd,
        so: pct(so),
        sd: pct(sd),
        theta_mm: cfg.theta_mm,
        threshold: cfg.threshold,
        w1: cfg.w1,
        w2: cfg.w2,
        hd_mode: cfg.hd_mode.name().to_owned(),
        oracle: cfg.method == DistanceMethod::Exhaustive,
        attention: String::new(),
        preprocessing: String::new(),
        conventions: CONVENTIONS.to_owned(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::{Dims, Spacing};

    fn ball(dims: Dims, radius: f64) -> Volume {
        let c = [dims.d as f64 / 2.0, dims.h as f64 / 2.0, dims.w as f64 / 2.0];
        Volume::from_fn(dims, Spacing::new(0.3, 0.25, 0.25).unwrap(), VolumeKind::Label, |[z, y, x]| {
            let d2 = (z as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2) + (x as f64 - c[2]).powi(2);
            if d2 <= radius * radius { 1.0 } else { 0.0 }
        })
        .unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let r = ball(Dims::cube(12).unwrap(), 4.0);
        let p = r.clone().with_kind(VolumeKind::Probability).unwrap();
        let rep = evaluate_case("perfect", &p, &r, &EvalConfig::default()).unwrap();
        for v in [rep.dsc, rep.wdsc, rep.iou, rep.sen, rep.ppv, rep.so, rep.sd] {
            assert_eq!(v, Some(100.0));
        }
        assert_eq!(rep.hd, Some(0.0));
        assert_eq!(rep.assd, Some(0.0));
    }

    #[test]
    fn empty_prediction_marks_undefined() {
        let r = ball(Dims::cube(8).unwrap(), 2.0);
        let p = Volume::filled(r.dims(), r.spacing(), VolumeKind::Probability, 0.0).unwrap();
        let rep = evaluate_case("empty", &p, &r, &EvalConfig::default()).unwrap();
        assert_eq!(rep.ppv, None);
        assert_eq!(rep.hd, None);
        assert_eq!(rep.dsc, Some(0.0));
    }

    #[test]
    fn spacing_must_match() {
        let r = ball(Dims::cube(8).unwrap(), 2.0);
        let p = r.clone().with_kind(VolumeKind::Probability).unwrap().with_spacing(Spacing::unit());
        assert!(matches!(
            evaluate_case("x", &p, &r, &EvalConfig::default()),
            Err(Error::SpacingMismatch { .. })
        ));
    }

    #[test]
    fn oracle_and_accelerated_agree() {
        let r = ball(Dims::cube(14).unwrap(), 4.5);
        let p = ball(Dims::cube(14).unwrap(), 3.0).with_kind(VolumeKind::Probability).unwrap();
        let fast = evaluate_case("c", &p, &r, &EvalConfig::default()).unwrap();
        let slow = evaluate_case(
            "c",
            &p,
            &r,
            &EvalConfig { method: DistanceMethod::Exhaustive, ..Default::default() },
        )
        .unwrap();
        for (a, b) in fast.metrics().iter().zip(slow.metrics()) {
            let (a, b) = (a.unwrap(), b.unwrap());
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        assert!(slow.oracle && !fast.oracle);
    }
}
