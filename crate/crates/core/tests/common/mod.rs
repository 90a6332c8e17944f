#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ctseg::nn::{AttentionKind, ModelConfig, Tensor5};
use ctseg::phantom::{generate_phantom, perturb_prediction, PhantomSpec};
use ctseg::{Dims, Spacing, Volume, VolumeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MODEL_SEED: u64 = 2024;
pub const INPUT_SEED: u64 = 77;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

/// Union of 1 to 4 random balls, never empty.
pub fn blob_mask(dims: Dims, spacing: Spacing, rng: &mut ChaCha8Rng) -> Volume {
    let balls: Vec<([f64; 3], f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let r = rng.random_range(1.5..5.0);
            let c = [
                rng.random_range(0.0..dims.d as f64),
                rng.random_range(0.0..dims.h as f64),
                rng.random_range(0.0..dims.w as f64),
            ];
            (c, r)
        })
        .collect();
    let mut v = Volume::from_fn(dims, spacing, VolumeKind::Label, |[z, y, x]| {
        let inside = balls.iter().any(|(c, r)| {
            let d2 = (z as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2) + (x as f64 - c[2]).powi(2);
            d2 <= r * r
        });
        if inside { 1.0 } else { 0.0 }
    })
    .unwrap();
    if v.foreground_count() == 0 {
        let mut data = v.into_data();
        data[dims.index(dims.d / 2, dims.h / 2, dims.w / 2)] = 1.0;
        v = Volume::new(dims, spacing, VolumeKind::Label, data).unwrap();
    }
    v
}

/// Seeded uniform `[0, 1)` input of shape `(1, 1, 16, 16, 16)`.
pub fn frozen_model_input() -> Tensor5 {
    let mut rng = ChaCha8Rng::seed_from_u64(INPUT_SEED);
    let data = (0..16 * 16 * 16).map(|_| rng.random::<f64>()).collect();
    Tensor5::new([1, 1, 16, 16, 16], data).unwrap()
}

pub fn golden_config(attention: AttentionKind) -> ModelConfig {
    ModelConfig {
        attention,
        seed: MODEL_SEED,
        ..ModelConfig::default()
    }
}

pub fn golden_hashes_path() -> PathBuf {
    fixtures().join("model_golden.json")
}

pub fn golden_hashes() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(golden_hashes_path()).expect("golden hash file");
    serde_json::from_str(&text).expect("golden hash json")
}

/// The small phantom pair behind the golden report.
pub fn report_fixture_pair() -> (Volume, Volume) {
    let spec = PhantomSpec {
        dims: Dims::new(16, 24, 24).unwrap(),
        tooth_count: 4,
        seed: 5,
        ..PhantomSpec::default()
    };
    let label = generate_phantom(&spec).unwrap().label;
    let pred = perturb_prediction(&label, 1, 0.02, 9).unwrap();
    (pred, label)
}

pub fn is_probability_range(v: f64) -> bool {
    v > 0.0 && v < 1.0
}
