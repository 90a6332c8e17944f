use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::ops::{Conv3d, Linear};

/// Product of every dimension after the first.
pub fn fan_in(shape: &[usize]) -> usize {
    shape.iter().skip(1).product::<usize>() * usize::from(shape.len() > 1)
}

/// Seeded stream of Kaiming-normal draws, `N(0, 2 / fan_in)`.
///
/// Draws are rounded to `f32` so a parameter set survives an `f32`
/// round trip unchanged.
#[derive(Debug, Clone)]
pub struct Initializer {
    rng: ChaCha8Rng,
}

impl Initializer {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kaiming(&mut self, shape: &[usize]) -> Result<Vec<f64>> {
        let fan = fan_in(shape);
        if fan == 0 {
            return Err(Error::InvalidParameter(format!(
                "weight shape {shape:?} has zero fan-in"
            )));
        }
        let std = (2.0 / fan as f64).sqrt();
        let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let n: usize = shape.iter().product();
        Ok((0..n)
            .map(|_| normal.sample(&mut self.rng) as f32 as f64)
            .collect())
    }

    pub fn conv(&mut self, out_channels: usize, in_channels: usize, kernel: usize) -> Result<Conv3d> {
        let mut c = Conv3d::zeros(out_channels, in_channels, kernel);
        c.weight = self.kaiming(&c.weight_shape())?;
        Ok(c)
    }

    pub fn linear(&mut self, out_features: usize, in_features: usize) -> Result<Linear> {
        let mut l = Linear::zeros(out_features, in_features);
        l.weight = self.kaiming(&[out_features, in_features])?;
        Ok(l)
    }
}

/// One weight tensor from a fresh stream seeded with `seed`.
pub fn kaiming_init(shape: &[usize], seed: u64) -> Result<Vec<f64>> {
    Initializer::new(seed).kaiming(shape)
}
