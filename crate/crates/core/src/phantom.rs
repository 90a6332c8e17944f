//! Synthetic CBCT-like jaw phantoms with exact tooth labels.
//!
//! Teeth are ellipsoids along a parabolic dental arch, drawn over a
//! lower-intensity jaw band. Optional missing teeth, bright appliance foci
//! (never labelled as tooth) and Gaussian intensity noise cover the four
//! missing-teeth / appliance categories.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume, VolumeKind};

pub const BACKGROUND_LEVEL: f64 = 0.1;
pub const JAW_LEVEL: f64 = 0.3;
pub const TOOTH_LEVEL: f64 = 0.7;
pub const APPLIANCE_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub spacing: Spacing,
    pub tooth_count: usize,
    pub missing_teeth: bool,
    pub appliance: bool,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            dims: Dims { d: 32, h: 64, w: 64 },
            spacing: Spacing {
                dz: 0.3,
                dy: 0.25,
                dx: 0.25,
            },
            tooth_count: 8,
            missing_teeth: false,
            appliance: false,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

/// Axis-aligned ellipsoid in voxel coordinates `(z, y, x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub center: [f64; 3],
    pub radii: [f64; 3],
}

impl Ellipsoid {
    pub fn contains(&self, [z, y, x]: [usize; 3]) -> bool {
        let q = |v: usize, a: usize| (v as f64 - self.center[a]) / self.radii[a];
        let (a, b, c) = (q(z, 0), q(y, 1), q(x, 2));
        a * a + b * b + c * c <= 1.0
    }

    fn fits(&self, dims: Dims) -> bool {
        let extent = [dims.d, dims.h, dims.w];
        (0..3).all(|a| {
            self.center[a] - self.radii[a] >= 0.0
                && self.center[a] + self.radii[a] <= (extent[a] - 1) as f64
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: Volume,
    pub label: Volume,
    /// Teeth present in the volume (after removing missing ones).
    pub teeth: Vec<Ellipsoid>,
}

struct Arch {
    front_y: f64,
    curvature: f64,
    center_x: f64,
}

impl Arch {
    fn y_at(&self, x: f64) -> f64 {
        self.front_y + self.curvature * (x - self.center_x).powi(2)
    }
}

pub fn generate_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    if !(spec.noise_sigma >= 0.0 && spec.noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise_sigma {} must be finite and >= 0",
            spec.noise_sigma
        )));
    }
    let dims = spec.dims;
    let (d, h, w) = (dims.d as f64, dims.h as f64, dims.w as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let x_lo = 0.15 * w;
    let x_hi = 0.85 * w;
    let arch = Arch {
        front_y: 0.3 * h,
        curvature: 0.4 * h / (0.35 * w).powi(2),
        center_x: w / 2.0,
    };
    let pitch = (x_hi - x_lo) / spec.tooth_count.max(1) as f64;
    let rx_base = 0.35 * pitch;
    let ry_base = (1.2 * rx_base).min(0.12 * h);
    let rz_base = 0.3 * d;

    let mut teeth = Vec::with_capacity(spec.tooth_count);
    for i in 0..spec.tooth_count {
        let cx = x_lo + (i as f64 + 0.5) * pitch;
        let jitter = |rng: &mut ChaCha8Rng| rng.random_range(0.9..1.1);
        let radii = [
            rz_base * jitter(&mut rng),
            ry_base * jitter(&mut rng),
            rx_base * jitter(&mut rng),
        ];
        let center = [d / 2.0 + rng.random_range(-0.05..0.05) * d, arch.y_at(cx), cx];
        let tooth = Ellipsoid { center, radii };
        if radii.iter().any(|&r| r < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "{} teeth do not fit in a {dims} volume (tooth radius below one voxel)",
                spec.tooth_count
            )));
        }
        if !tooth.fits(dims) {
            return Err(Error::InvalidParameter(format!(
                "tooth {i} at {center:?} with radii {radii:?} exceeds the {dims} volume"
            )));
        }
        teeth.push(tooth);
    }

    if spec.missing_teeth && teeth.len() >= 2 {
        let remove = (teeth.len() / 4).max(1);
        let mut order: Vec<usize> = (0..teeth.len()).collect();
        order.shuffle(&mut rng);
        let mut gone = order[..remove].to_vec();
        gone.sort_unstable();
        for i in gone.into_iter().rev() {
            teeth.remove(i);
        }
    }

    let band = 1.6 * ry_base.max(1.0);
    let mut image = vec![BACKGROUND_LEVEL; dims.len()];
    let mut label = vec![0.0; dims.len()];
    for i in 0..dims.len() {
        let c @ [z, y, x] = dims.coords(i);
        let (zf, yf, xf) = (z as f64, y as f64, x as f64);
        if (zf - d / 2.0).abs() <= 0.4 * d
            && (0.1 * w..=0.9 * w).contains(&xf)
            && (yf - arch.y_at(xf)).abs() <= band
        {
            image[i] = JAW_LEVEL;
        }
        if teeth.iter().any(|t| t.contains(c)) {
            image[i] = TOOTH_LEVEL;
            label[i] = 1.0;
        }
    }

    if spec.appliance && !teeth.is_empty() {
        let count = (teeth.len() / 3).max(1);
        let mut order: Vec<usize> = (0..teeth.len()).collect();
        order.shuffle(&mut rng);
        for &t in &order[..count] {
            let tooth = teeth[t];
            let focus = [
                tooth.center[0],
                tooth.center[1] - tooth.radii[1] - 1.5,
                tooth.center[2],
            ];
            paint_focus(&mut image, &label, dims, focus, 1.2);
        }
    }

    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for v in &mut image {
            *v += rng.sample(normal);
        }
    }

    Ok(Phantom {
        image: Volume::new(dims, spec.spacing, VolumeKind::Intensity, image)?,
        label: Volume::new(dims, spec.spacing, VolumeKind::Label, label)?,
        teeth,
    })
}

/// Bright sphere on non-tooth voxels; parts outside the grid are dropped.
fn paint_focus(image: &mut [f64], label: &[f64], dims: Dims, center: [f64; 3], radius: f64) {
    let lo = |c: f64| (c - radius).floor().max(0.0) as usize;
    let hi = |c: f64, n: usize| ((c + radius).ceil().max(0.0) as usize).min(n - 1);
    if center[0] + radius < 0.0 || center[1] + radius < 0.0 || center[2] + radius < 0.0 {
        return;
    }
    for z in lo(center[0])..=hi(center[0], dims.d) {
        for y in lo(center[1])..=hi(center[1], dims.h) {
            for x in lo(center[2])..=hi(center[2], dims.w) {
                let dz = z as f64 - center[0];
                let dy = y as f64 - center[1];
                let dx = x as f64 - center[2];
                let i = dims.index(z, y, x);
                if dz * dz + dy * dy + dx * dx <= radius * radius && label[i] == 0.0 {
                    image[i] = APPLIANCE_LEVEL;
                }
            }
        }
    }
}

/// 6-connected binary dilation.
pub fn dilate6(mask: &[bool], dims: Dims) -> Vec<bool> {
    (0..dims.len())
        .map(|i| mask[i] || dims.neighbors6(dims.coords(i)).any(|[z, y, x]| mask[dims.index(z, y, x)]))
        .collect()
}

/// Degrades a label into a probability map: `dilate_steps` rounds of
/// 6-connected dilation, seeded voxel flips at `flip_rate`, then a
/// neighbourhood-agreement confidence. Foreground lands in `[0.55, 1]` and
/// background in `[0, 0.45]`, so thresholding at 0.5 recovers the degraded mask.
pub fn perturb_prediction(label: &Volume, dilate_steps: usize, flip_rate: f64, seed: u64) -> Result<Volume> {
    label.require_kind(VolumeKind::Label)?;
    if !(0.0..=1.0).contains(&flip_rate) {
        return Err(Error::InvalidParameter(format!(
            "flip_rate {flip_rate} must lie in [0, 1]"
        )));
    }
    let dims = label.dims();
    let mut mask = label.mask();
    for _ in 0..dilate_steps {
        mask = dilate6(&mask, dims);
    }
    if flip_rate > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in &mut mask {
            if rng.random::<f64>() < flip_rate {
                *m = !*m;
            }
        }
    }
    let probs = (0..dims.len())
        .map(|i| {
            let c = dims.coords(i);
            let (mut agree, mut total) = (0usize, 0usize);
            for [z, y, x] in dims.neighbors6(c) {
                total += 1;
                if mask[dims.index(z, y, x)] == mask[i] {
                    agree += 1;
                }
            }
            let a = if total == 0 { 1.0 } else { agree as f64 / total as f64 };
            if mask[i] {
                0.55 + 0.45 * a
            } else {
                0.45 * (1.0 - a)
            }
        })
        .collect();
    label.map_data(VolumeKind::Probability, probs)
}
