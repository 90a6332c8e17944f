//! Exact squared Euclidean distance transform on an anisotropic voxel grid.
//!
//! Separable lower-envelope-of-parabolas transform applied along x, then y,
//! then z. Each 1D pass computes `min_p (s * (q - p))^2 + f(p)` exactly,
//! where `s` is the voxel size along that axis.

use rayon::prelude::*;

use crate::volume::{Dims, Spacing};

/// 1D transform of one line. Sites with infinite `f` are not part of the
/// envelope; a line without finite sites stays infinite.
fn transform_line(f: &[f64], s2: f64, out: &mut [f64]) {
    let mut sites = (0..f.len()).filter(|&i| f[i].is_finite());
    let Some(first) = sites.next() else {
        out.fill(f64::INFINITY);
        return;
    };
    let height = |p: usize| f[p] + s2 * (p * p) as f64;
    // parabola vertices on the envelope and the boundaries between them;
    // z[0] = -inf guarantees the pop loop never empties v
    let mut v: Vec<usize> = vec![first];
    let mut z: Vec<f64> = vec![f64::NEG_INFINITY, f64::INFINITY];
    for q in sites {
        let mut cross;
        loop {
            let p = *v.last().unwrap();
            cross = (height(q) - height(p)) / (2.0 * s2 * (q - p) as f64);
            if cross <= z[v.len() - 1] {
                v.pop();
                z.pop();
            } else {
                break;
            }
        }
        *z.last_mut().unwrap() = cross;
        v.push(q);
        z.push(f64::INFINITY);
    }
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q.abs_diff(p) as f64;
        *o = s2 * (d * d) + f[p];
    }
}

/// Runs the 1D transform along one axis of a z-major buffer.
fn pass(buf: &[f64], dims: Dims, axis: usize, s2: f64) -> Vec<f64> {
    let Dims { d, h, w } = dims;
    let (len, stride, lines): (usize, usize, Vec<usize>) = match axis {
        // x: contiguous rows
        2 => (w, 1, (0..d * h).map(|r| r * w).collect()),
        // y: one line per (z, x)
        1 => (
            h,
            w,
            (0..d).flat_map(|z| (0..w).map(move |x| z * h * w + x)).collect(),
        ),
        _ => (d, h * w, (0..h * w).collect()),
    };
    let results: Vec<Vec<f64>> = lines
        .par_iter()
        .map(|&start| {
            let line: Vec<f64> = (0..len).map(|i| buf[start + i * stride]).collect();
            let mut out = vec![0.0; len];
            transform_line(&line, s2, &mut out);
            out
        })
        .collect();
    let mut next = vec![0.0; buf.len()];
    for (&start, line) in lines.iter().zip(&results) {
        for (i, &v) in line.iter().enumerate() {
            next[start + i * stride] = v;
        }
    }
    next
}

/// Squared physical distance from every voxel to the nearest feature voxel.
/// Returns all-infinite when there are no features.
pub fn squared_edt(features: &[bool], dims: Dims, spacing: Spacing) -> Vec<f64> {
    assert_eq!(features.len(), dims.len(), "feature mask does not match dims");
    let init: Vec<f64> = features
        .iter()
        .map(|&f| if f { 0.0 } else { f64::INFINITY })
        .collect();
    let after_x = pass(&init, dims, 2, spacing.dx * spacing.dx);
    let after_y = pass(&after_x, dims, 1, spacing.dy * spacing.dy);
    pass(&after_y, dims, 0, spacing.dz * spacing.dz)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(features: &[bool], dims: Dims, s: Spacing) -> Vec<f64> {
        let sites: Vec<[usize; 3]> = (0..dims.len())
            .filter(|&i| features[i])
            .map(|i| dims.coords(i))
            .collect();
        (0..dims.len())
            .map(|i| {
                let [z, y, x] = dims.coords(i);
                sites
                    .iter()
                    .map(|&[a, b, c]| {
                        let dz = z.abs_diff(a) as f64 * s.dz;
                        let dy = y.abs_diff(b) as f64 * s.dy;
                        let dx = x.abs_diff(c) as f64 * s.dx;
                        dz * dz + dy * dy + dx * dx
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn single_line() {
        let f = [f64::INFINITY, 0.0, f64::INFINITY, f64::INFINITY, 0.0];
        let mut out = [0.0; 5];
        transform_line(&f, 1.0, &mut out);
        assert_eq!(out, [1.0, 0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_line_stays_infinite() {
        let f = [f64::INFINITY; 4];
        let mut out = [0.0; 4];
        transform_line(&f, 1.0, &mut out);
        assert!(out.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn matches_brute_force_on_pseudo_random_masks() {
        let dims = Dims::new(5, 7, 6).unwrap();
        let spacing = Spacing::new(0.3, 0.25, 0.4).unwrap();
        let mut state = 0x2545f4914f6cdd1du64;
        for _ in 0..20 {
            let features: Vec<bool> = (0..dims.len())
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    state % 11 == 0
                })
                .collect();
            let got = squared_edt(&features, dims, spacing);
            let want = brute(&features, dims, spacing);
            for (g, w) in got.iter().zip(&want) {
                if w.is_infinite() {
                    assert!(g.is_infinite());
                } else {
                    assert!((g - w).abs() <= 1e-12 * w.max(1.0), "{g} vs {w}");
                }
            }
        }
    }
}
