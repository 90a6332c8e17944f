//! Contrast limited adaptive histogram equalization on a single 2D slice.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaheParams {
    /// Histogram clip factor, relative to a uniform histogram
    /// (a bin may hold at most `clip_limit * tile_pixels / bins` counts).
    pub clip_limit: f64,
    /// Tile grid as `(rows, columns)`.
    pub tiles: (usize, usize),
    pub bins: usize,
}

impl Default for ClaheParams {
    fn default() -> Self {
        Self {
            clip_limit: 2.0,
            tiles: (8, 8),
            bins: 256,
        }
    }
}

impl ClaheParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.clip_limit > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clip_limit {} must be > 0",
                self.clip_limit
            )));
        }
        if self.tiles.0 == 0 || self.tiles.1 == 0 {
            return Err(Error::InvalidParameter(format!(
                "tile grid {:?} must be at least 1x1",
                self.tiles
            )));
        }
        if self.bins < 2 {
            return Err(Error::InvalidParameter(format!("bins {} must be >= 2", self.bins)));
        }
        Ok(())
    }
}

/// Splits `n` pixels into `parts` contiguous tiles; returns `parts + 1` bounds.
fn tile_bounds(n: usize, parts: usize) -> Vec<usize> {
    (0..=parts).map(|i| i * n / parts).collect()
}

/// Tile index pair and interpolation weight for a pixel coordinate.
fn interp_axis(pos: usize, centers: &[f64]) -> (usize, usize, f64) {
    let p = pos as f64;
    let last = centers.len() - 1;
    if p <= centers[0] {
        return (0, 0, 0.0);
    }
    if p >= centers[last] {
        return (last, last, 0.0);
    }
    let i = centers.partition_point(|&c| c <= p) - 1;
    let t = (p - centers[i]) / (centers[i + 1] - centers[i]);
    (i, i + 1, t)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Equalizes an `h x w` slice. Values are binned over the slice's own
/// `[min, max]` and mapped back onto that range, so the output never leaves it.
/// A constant slice is returned unchanged.
pub fn clahe_slice(slice: &[f64], h: usize, w: usize, params: &ClaheParams) -> Result<Vec<f64>> {
    params.validate()?;
    if slice.len() != h * w {
        return Err(Error::Shape(format!(
            "slice has {} values, expected {h}x{w}",
            slice.len()
        )));
    }
    let (ty, tx) = params.tiles;
    if h < ty || w < tx {
        return Err(Error::InvalidParameter(format!(
            "slice {h}x{w} is smaller than the tile grid {ty}x{tx}"
        )));
    }
    let (lo, hi) = slice
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !(hi > lo) {
        return Ok(slice.to_vec());
    }
    let bins = params.bins;
    let top = (bins - 1) as f64;
    let bin_of = |v: f64| (((v - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, top) as usize;
    let binned: Vec<usize> = slice.iter().map(|&v| bin_of(v)).collect();

    let rows = tile_bounds(h, ty);
    let cols = tile_bounds(w, tx);
    let mut luts = vec![vec![0.0f64; bins]; ty * tx];
    for i in 0..ty {
        for j in 0..tx {
            let mut hist = vec![0.0f64; bins];
            for y in rows[i]..rows[i + 1] {
                for x in cols[j]..cols[j + 1] {
                    hist[binned[y * w + x]] += 1.0;
                }
            }
            let area = ((rows[i + 1] - rows[i]) * (cols[j + 1] - cols[j])) as f64;
            let limit = (params.clip_limit * area / bins as f64).max(1.0);
            let mut excess = 0.0;
            for c in &mut hist {
                if *c > limit {
                    excess += *c - limit;
                    *c = limit;
                }
            }
            let share = excess / bins as f64;
            let lut = &mut luts[i * tx + j];
            let mut cdf = 0.0;
            for (b, c) in hist.iter().enumerate() {
                cdf += c + share;
                lut[b] = (cdf / area).min(1.0);
            }
        }
    }

    let centers = |bounds: &[usize]| -> Vec<f64> {
        bounds
            .windows(2)
            .map(|b| (b[0] + b[1] - 1) as f64 / 2.0)
            .collect()
    };
    let cy = centers(&rows);
    let cx = centers(&cols);
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        let (i0, i1, wy) = interp_axis(y, &cy);
        for x in 0..w {
            let (j0, j1, wx) = interp_axis(x, &cx);
            let b = binned[y * w + x];
            let top_row = lerp(luts[i0 * tx + j0][b], luts[i0 * tx + j1][b], wx);
            let bottom_row = lerp(luts[i1 * tx + j0][b], luts[i1 * tx + j1][b], wx);
            let level = lerp(top_row, bottom_row, wy).clamp(0.0, 1.0);
            // lo + 1 * (hi - lo) can round one ulp past hi
            out.push(lerp(lo, hi, level).min(hi));
        }
    }
    Ok(out)
}
