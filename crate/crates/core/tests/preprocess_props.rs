use ctseg::phantom::{generate_phantom, PhantomSpec};
use ctseg::preprocess::{clahe_slice, clahe_volume, normalize_volume, resize_axial, ClaheParams};
use ctseg::{Dims, Spacing, Volume, VolumeKind};
use proptest::prelude::*;

fn slice(h: usize, w: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, h * w)
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clahe_stays_within_slice_range(
        s in slice(24, 20),
        clip in 0.5f64..6.0,
        tiles in (1usize..6, 1usize..6),
        bins in 2usize..300,
    ) {
        let params = ClaheParams { clip_limit: clip, tiles, bins };
        let out = clahe_slice(&s, 24, 20, &params).unwrap();
        let (lo, hi) = range(&s);
        let (olo, ohi) = range(&out);
        prop_assert!(olo >= lo && ohi <= hi, "[{}, {}] outside [{}, {}]", olo, ohi, lo, hi);
    }

    #[test]
    fn normalize_hits_unit_range(s in slice(4, 6)) {
        let v = Volume::new(Dims::new(1, 4, 6).unwrap(), Spacing::unit(), VolumeKind::Intensity, s).unwrap();
        let (lo, hi) = v.min_max();
        prop_assume!(hi > lo);
        let n = normalize_volume(&v).unwrap();
        prop_assert_eq!(n.min_max(), (0.0, 1.0));
    }

    #[test]
    fn resize_to_same_size_is_identity(s in slice(5, 7), d in 1usize..3) {
        let data: Vec<f64> = (0..d).flat_map(|_| s.iter().copied()).collect();
        let v = Volume::new(Dims::new(d, 5, 7).unwrap(), Spacing::unit(), VolumeKind::Intensity, data).unwrap();
        let r = resize_axial(&v, 5, 7).unwrap();
        prop_assert_eq!(r.data(), v.data());
        prop_assert_eq!(r.spacing(), v.spacing());
    }

    #[test]
    fn resize_preserves_constants(c in -10.0f64..10.0, oh in 2usize..40, ow in 2usize..40) {
        let v = Volume::filled(Dims::new(2, 9, 11).unwrap(), Spacing::unit(), VolumeKind::Intensity, c).unwrap();
        let r = resize_axial(&v, oh, ow).unwrap();
        prop_assert!(r.data().iter().all(|&x| x == c));
    }

    #[test]
    fn resize_stays_in_input_range(s in slice(6, 6), oh in 2usize..20, ow in 2usize..20) {
        let v = Volume::new(Dims::new(1, 6, 6).unwrap(), Spacing::unit(), VolumeKind::Intensity, s.clone()).unwrap();
        let r = resize_axial(&v, oh, ow).unwrap();
        let (lo, hi) = range(&s);
        let (rlo, rhi) = range(r.data());
        prop_assert!(rlo >= lo - 1e-12 && rhi <= hi + 1e-12);
    }
}

#[test]
fn phantom_pipeline_normalizes_exactly() {
    for seed in 0..5 {
        let spec = PhantomSpec {
            noise_sigma: 0.02,
            seed,
            ..PhantomSpec::default()
        };
        let ph = generate_phantom(&spec).unwrap();
        let out = normalize_volume(&clahe_volume(&ph.image, &ClaheParams::default()).unwrap()).unwrap();
        assert_eq!(out.min_max(), (0.0, 1.0));
    }
}

#[test]
fn resize_256_identity_and_spacing() {
    let dims = Dims::new(1, 256, 256).unwrap();
    let v = Volume::from_fn(dims, Spacing::new(0.3, 0.25, 0.25).unwrap(), VolumeKind::Intensity, |[_, y, x]| {
        ((y * 31 + x * 17) % 97) as f64
    })
    .unwrap();
    assert_eq!(resize_axial(&v, 256, 256).unwrap(), v);
    let half = resize_axial(&v, 128, 128).unwrap();
    assert_eq!(half.spacing(), Spacing::new(0.3, 0.5, 0.5).unwrap());
}
