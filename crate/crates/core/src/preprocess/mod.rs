//! Slice-wise contrast enhancement, intensity normalization and axial resizing.
//!
//! The pipeline order is CLAHE, then normalization, then optional resize.

mod clahe;

use rayon::prelude::*;

pub use clahe::{clahe_slice, ClaheParams};

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume, VolumeKind};

/// Axial slice size used for network input.
pub const TARGET_HW: (usize, usize) = (256, 256);

/// Label describing the applied chain, embedded in reports.
pub const PIPELINE: &str = "clahe>normalize";

/// Applies [`clahe_slice`] to every axial slice.
pub fn clahe_volume(v: &Volume, params: &ClaheParams) -> Result<Volume> {
    let Dims { h, w, .. } = v.dims();
    let slices: Vec<Result<Vec<f64>>> = v
        .data()
        .par_chunks(h * w)
        .map(|s| clahe_slice(s, h, w, params))
        .collect();
    let mut data = Vec::with_capacity(v.data().len());
    for s in slices {
        data.extend(s?);
    }
    v.map_data(v.kind(), data)
}

/// Min-max rescale to `[0, 1]`. A constant volume maps to all zeros.
pub fn normalize_volume(v: &Volume) -> Result<Volume> {
    let (lo, hi) = v.min_max();
    let data = if hi > lo {
        let range = hi - lo;
        v.data().iter().map(|&x| ((x - lo) / range).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; v.data().len()]
    };
    v.map_data(v.kind(), data)
}

/// Source coordinate for output index `i` under align-corners sampling.
fn source_coord(i: usize, n_in: usize, n_out: usize) -> (usize, usize, f64) {
    if n_out == 1 || n_in == 1 {
        return (0, 0, 0.0);
    }
    let pos = (i * (n_in - 1)) as f64 / (n_out - 1) as f64;
    let i0 = (pos.floor() as usize).min(n_in - 1);
    let i1 = (i0 + 1).min(n_in - 1);
    (i0, i1, pos - i0 as f64)
}

/// Bilinear (align-corners) resampling of each axial slice to `out_h x out_w`.
/// Depth is unchanged; in-plane spacing is scaled by `H / out_h` and `W / out_w`.
/// Label volumes come back as probability maps.
pub fn resize_axial(v: &Volume, out_h: usize, out_w: usize) -> Result<Volume> {
    let Dims { d, h, w } = v.dims();
    if h < 2 || w < 2 {
        return Err(Error::InvalidParameter(format!(
            "axial slice {h}x{w} must be at least 2x2"
        )));
    }
    let out_dims = Dims::new(d, out_h, out_w)?;
    let rows: Vec<_> = (0..out_h).map(|y| source_coord(y, h, out_h)).collect();
    let cols: Vec<_> = (0..out_w).map(|x| source_coord(x, w, out_w)).collect();
    let mut data = Vec::with_capacity(out_dims.len());
    for slice in v.data().chunks(h * w) {
        for &(y0, y1, ty) in &rows {
            for &(x0, x1, tx) in &cols {
                let a = slice[y0 * w + x0];
                let b = slice[y0 * w + x1];
                let c = slice[y1 * w + x0];
                let e = slice[y1 * w + x1];
                let top = a + tx * (b - a);
                let bottom = c + tx * (e - c);
                data.push(top + ty * (bottom - top));
            }
        }
    }
    let s = v.spacing();
    let spacing = Spacing::new(
        s.dz,
        s.dy * h as f64 / out_h as f64,
        s.dx * w as f64 / out_w as f64,
    )?;
    let kind = match v.kind() {
        VolumeKind::Label => VolumeKind::Probability,
        k => k,
    };
    Volume::new(out_dims, spacing, kind, data)
}
