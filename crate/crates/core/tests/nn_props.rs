mod common;

use ctseg::nn::{
    model_forward, Attention, AttentionKind, Initializer, ModelConfig, ModelParams, Tensor5,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::is_probability_range;

fn random_tensor(shape: [usize; 5], seed: u64) -> Tensor5 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = shape.iter().product();
    Tensor5::new(shape, (0..n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

fn variant() -> impl Strategy<Value = AttentionKind> {
    prop::sample::select(AttentionKind::ALL[1..].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn attention_preserves_shape_and_normalizes(
        kind in variant(),
        b in 1usize..3,
        c in prop::sample::select(vec![2usize, 4, 8, 16]),
        dims in (1usize..4, 1usize..4, 1usize..4),
        seed in any::<u64>(),
    ) {
        let shape = [b, c, 2 * dims.0, 2 * dims.1, 2 * dims.2];
        let a = Attention::init(kind, c, &mut Initializer::new(seed)).unwrap().unwrap();
        let x = random_tensor(shape, seed ^ 0x5eed);
        let (y, trace) = a.forward_traced(&x, None).unwrap();
        prop_assert_eq!(y.shape(), shape);
        prop_assert!(y.is_finite());
        for d in &trace.distributions {
            prop_assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!(d.iter().all(|&p| p >= 0.0));
        }
        prop_assert!(trace.gates.iter().all(|&g| g > 0.0 && g < 1.0));
    }

    #[test]
    fn gate_with_coarse_signal(c in 1usize..6, seed in any::<u64>()) {
        let a = Attention::init(AttentionKind::Gate, c, &mut Initializer::new(seed)).unwrap().unwrap();
        let x = random_tensor([1, c, 4, 4, 4], seed);
        let g = random_tensor([1, c, 2, 2, 2], seed.wrapping_add(1));
        let (y, trace) = a.forward_traced(&x, Some(&g)).unwrap();
        prop_assert_eq!(y.shape(), x.shape());
        prop_assert_eq!(trace.gates.len(), 64);
        prop_assert!(trace.gates.iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn model_outputs_are_probabilities(kind in prop::sample::select(AttentionKind::ALL.to_vec()), seed in any::<u64>()) {
        let cfg = ModelConfig { attention: kind, seed, ..ModelConfig::default() };
        let params = ModelParams::init(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Tensor5::new([1, 1, 8, 8, 16], (0..1024).map(|_| rng.random::<f64>()).collect()).unwrap();
        let out = model_forward(&x, &cfg, &params).unwrap();
        prop_assert_eq!(out.aux.len(), 2);
        for m in std::iter::once(&out.main).chain(&out.aux) {
            prop_assert_eq!(m.shape(), [1, 1, 8, 8, 16]);
            prop_assert!(m.data().iter().all(|&v| is_probability_range(v)));
        }
        prop_assert_eq!(model_forward(&x, &cfg, &params).unwrap(), out);
    }
}

#[test]
fn extreme_inputs_stay_finite() {
    for kind in AttentionKind::ALL {
        let cfg = ModelConfig {
            attention: kind,
            seed: 3,
            ..ModelConfig::default()
        };
        let params = ModelParams::init(&cfg).unwrap();
        for fill in [0.0, 1.0] {
            let x = Tensor5::full([1, 1, 8, 8, 8], fill);
            let out = model_forward(&x, &cfg, &params).unwrap();
            assert!(out.main.is_finite(), "{kind} on constant {fill}");
            assert!(out.main.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }
}

#[test]
fn batch_items_are_independent() {
    let cfg = ModelConfig {
        attention: AttentionKind::Cbam,
        ..ModelConfig::default()
    };
    let params = ModelParams::init(&cfg).unwrap();
    let a = random_tensor([1, 1, 8, 8, 8], 1).map(|v| (v + 2.0) / 4.0);
    let b = random_tensor([1, 1, 8, 8, 8], 2).map(|v| (v + 2.0) / 4.0);
    let mut joint = a.data().to_vec();
    joint.extend_from_slice(b.data());
    let both = Tensor5::new([2, 1, 8, 8, 8], joint).unwrap();
    let out = model_forward(&both, &cfg, &params).unwrap();
    let oa = model_forward(&a, &cfg, &params).unwrap();
    let ob = model_forward(&b, &cfg, &params).unwrap();
    assert_eq!(out.main.item(0), oa.main.data());
    assert_eq!(out.main.item(1), ob.main.data());
}
