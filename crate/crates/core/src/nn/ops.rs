use rayon::prelude::*;

use crate::error::{Error, Result};

use super::tensor::Tensor5;

pub const INSTANCE_NORM_EPS: f64 = 1e-5;

/// Cubic-kernel 3D convolution with stride 1 and zero "same" padding.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv3d {
    pub out_channels: usize,
    pub in_channels: usize,
    /// Kernel edge length, odd.
    pub kernel: usize,
    pub dilation: usize,
    /// `(out, in, k, k, k)` row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv3d {
    pub fn zeros(out_channels: usize, in_channels: usize, kernel: usize) -> Self {
        Self {
            out_channels,
            in_channels,
            kernel,
            dilation: 1,
            weight: vec![0.0; out_channels * in_channels * kernel.pow(3)],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn with_dilation(mut self, dilation: usize) -> Self {
        self.dilation = dilation;
        self
    }

    pub fn weight_shape(&self) -> [usize; 5] {
        let k = self.kernel;
        [self.out_channels, self.in_channels, k, k, k]
    }

    pub fn validate(&self) -> Result<()> {
        if self.kernel % 2 == 0 || self.dilation == 0 {
            return Err(Error::Shape(format!(
                "kernel {} / dilation {} must be odd / positive",
                self.kernel, self.dilation
            )));
        }
        let expected = self.out_channels * self.in_channels * self.kernel.pow(3);
        if self.weight.len() != expected || self.bias.len() != self.out_channels {
            return Err(Error::Shape(format!(
                "conv weights {} / bias {} do not match shape {:?}",
                self.weight.len(),
                self.bias.len(),
                self.weight_shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor5) -> Result<Tensor5> {
        conv3d(x, self)
    }
}

/// Valid output range `[lo, hi)` along one axis for a tap offset `off`.
fn tap_range(n: usize, off: isize) -> (usize, usize) {
    let lo = (-off).max(0) as usize;
    let hi = (n as isize - off.max(0)).max(0) as usize;
    (lo.min(hi), hi)
}

pub fn conv3d(x: &Tensor5, conv: &Conv3d) -> Result<Tensor5> {
    conv.validate()?;
    let [b, ci, d, h, w] = x.shape();
    if ci != conv.in_channels {
        return Err(Error::Shape(format!(
            "conv expects {} input channels, tensor has {ci}",
            conv.in_channels
        )));
    }
    let co = conv.out_channels;
    let n = d * h * w;
    let k = conv.kernel;
    let half = (k / 2) as isize;
    let dil = conv.dilation as isize;
    let mut out = vec![0.0; b * co * n];
    out.par_chunks_mut(n).enumerate().for_each(|(slab, dst)| {
        let (bi, oc) = (slab / co, slab % co);
        dst.fill(conv.bias[oc]);
        for ic in 0..ci {
            let src = x.slab(bi, ic);
            let wbase = (oc * ci + ic) * k * k * k;
            for kz in 0..k {
                let oz = (kz as isize - half) * dil;
                let (z0, z1) = tap_range(d, oz);
                for ky in 0..k {
                    let oy = (ky as isize - half) * dil;
                    let (y0, y1) = tap_range(h, oy);
                    for kx in 0..k {
                        let ox = (kx as isize - half) * dil;
                        let (x0, x1) = tap_range(w, ox);
                        let wt = conv.weight[wbase + (kz * k + ky) * k + kx];
                        if wt == 0.0 || x0 >= x1 {
                            continue;
                        }
                        for z in z0..z1 {
                            let sz = (z as isize + oz) as usize;
                            for y in y0..y1 {
                                let sy = (y as isize + oy) as usize;
                                let row = (z * h + y) * w;
                                let srow = (sz * h + sy) * w;
                                let sx0 = (x0 as isize + ox) as usize;
                                let d_row = &mut dst[row + x0..row + x1];
                                let s_row = &src[srow + sx0..srow + sx0 + (x1 - x0)];
                                for (o, &s) in d_row.iter_mut().zip(s_row) {
                                    *o += wt * s;
                                }
                            }
                        }
                    }
                }
            }
        }
    });
    Ok(Tensor5::from_raw([b, co, d, h, w], out))
}

/// Non-overlapping max pooling with window and stride `factor`.
pub fn maxpool3d(x: &Tensor5, factor: usize) -> Result<Tensor5> {
    let [b, c, d, h, w] = x.shape();
    if factor == 0 || d % factor != 0 || h % factor != 0 || w % factor != 0 {
        return Err(Error::Shape(format!(
            "max pooling by {factor} needs divisible dims, got {d}x{h}x{w}"
        )));
    }
    let (od, oh, ow) = (d / factor, h / factor, w / factor);
    let mut out = Vec::with_capacity(b * c * od * oh * ow);
    for bi in 0..b {
        for ci in 0..c {
            let src = x.slab(bi, ci);
            for z in 0..od {
                for y in 0..oh {
                    for xx in 0..ow {
                        let mut m = f64::NEG_INFINITY;
                        for dz in 0..factor {
                            for dy in 0..factor {
                                let row = ((z * factor + dz) * h + y * factor + dy) * w + xx * factor;
                                for &v in &src[row..row + factor] {
                                    m = m.max(v);
                                }
                            }
                        }
                        out.push(m);
                    }
                }
            }
        }
    }
    Ok(Tensor5::from_raw([b, c, od, oh, ow], out))
}

/// Source index pair and weight for half-pixel linear resampling.
fn linear_taps(n_in: usize, n_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = n_in as f64 / n_out as f64;
    (0..n_out)
        .map(|i| {
            let s = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
            let i0 = s.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            (i0, i1, s - i0 as f64)
        })
        .collect()
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Trilinear resampling to `size`, pixel centers aligned (no corner alignment).
pub fn resize_trilinear(x: &Tensor5, size: [usize; 3]) -> Result<Tensor5> {
    let [b, c, d, h, w] = x.shape();
    let [od, oh, ow] = size;
    if od == 0 || oh == 0 || ow == 0 || d == 0 || h == 0 || w == 0 {
        return Err(Error::Shape(format!("cannot resize {d}x{h}x{w} to {od}x{oh}x{ow}")));
    }
    let (tz, ty, tx) = (linear_taps(d, od), linear_taps(h, oh), linear_taps(w, ow));
    let mut out = Vec::with_capacity(b * c * od * oh * ow);
    for bi in 0..b {
        for ci in 0..c {
            let src = x.slab(bi, ci);
            let at = |z: usize, y: usize, xx: usize| src[(z * h + y) * w + xx];
            for &(z0, z1, fz) in &tz {
                for &(y0, y1, fy) in &ty {
                    for &(x0, x1, fx) in &tx {
                        let c00 = lerp(at(z0, y0, x0), at(z0, y0, x1), fx);
                        let c01 = lerp(at(z0, y1, x0), at(z0, y1, x1), fx);
                        let c10 = lerp(at(z1, y0, x0), at(z1, y0, x1), fx);
                        let c11 = lerp(at(z1, y1, x0), at(z1, y1, x1), fx);
                        out.push(lerp(lerp(c00, c01, fy), lerp(c10, c11, fy), fz));
                    }
                }
            }
        }
    }
    Ok(Tensor5::from_raw([b, c, od, oh, ow], out))
}

pub fn upsample3d(x: &Tensor5, factor: usize) -> Result<Tensor5> {
    let [d, h, w] = x.spatial();
    resize_trilinear(x, [d * factor, h * factor, w * factor])
}

/// Per-slab standardization without affine parameters.
pub fn instance_norm(x: &Tensor5) -> Tensor5 {
    let n = x.slab_len();
    let mut out = x.data().to_vec();
    out.par_chunks_mut(n.max(1)).for_each(|slab| {
        let len = slab.len() as f64;
        let mean = slab.iter().sum::<f64>() / len;
        let var = slab.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / len;
        let inv = 1.0 / (var + INSTANCE_NORM_EPS).sqrt();
        for v in slab.iter_mut() {
            *v = (*v - mean) * inv;
        }
    });
    Tensor5::from_raw(x.shape(), out)
}

pub fn relu(x: &Tensor5) -> Tensor5 {
    x.map(|v| v.max(0.0))
}

pub fn sigmoid_scalar(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid(x: &Tensor5) -> Tensor5 {
    x.map(sigmoid_scalar)
}

/// Max-shifted softmax in place.
pub fn softmax_in_place(v: &mut [f64]) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - m).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Fully connected layer on a flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub out_features: usize,
    pub in_features: usize,
    /// `(out, in)` row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(out_features: usize, in_features: usize) -> Self {
        Self {
            out_features,
            in_features,
            weight: vec![0.0; out_features * in_features],
            bias: vec![0.0; out_features],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.in_features
            || self.weight.len() != self.out_features * self.in_features
            || self.bias.len() != self.out_features
        {
            return Err(Error::Shape(format!(
                "linear {}->{} applied to {} features",
                self.in_features,
                self.out_features,
                x.len()
            )));
        }
        Ok(self
            .weight
            .chunks(self.in_features)
            .zip(&self.bias)
            .map(|(row, &b)| row.iter().zip(x).fold(b, |acc, (w, v)| acc + w * v))
            .collect())
    }
}

/// Per-channel spatial mean of batch item `b`.
pub fn global_avg_pool(x: &Tensor5, b: usize) -> Vec<f64> {
    let n = x.slab_len() as f64;
    (0..x.channels()).map(|c| x.slab(b, c).iter().sum::<f64>() / n).collect()
}

pub fn global_max_pool(x: &Tensor5, b: usize) -> Vec<f64> {
    (0..x.channels())
        .map(|c| x.slab(b, c).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}
