mod common;

use std::fs;
use std::process::Command;

use ctseg::io::{read_volume, write_volume, Dtype};
use ctseg::nn::{model_forward, AttentionKind, Initializer, ModelParams, Reb, Tensor5};
use ctseg::VolumeKind;

use common::*;

fn reb_output() -> Tensor5 {
    let reb = Reb::init(&mut Initializer::new(MODEL_SEED), 1, 8).unwrap();
    reb.forward(&frozen_model_input()).unwrap()
}

fn model_digest(kind: AttentionKind) -> String {
    let cfg = golden_config(kind);
    let params = ModelParams::init(&cfg).unwrap();
    model_forward(&frozen_model_input(), &cfg, &params).unwrap().digest()
}

fn evaluate(extra: &[&str]) -> Vec<u8> {
    let dir = fixtures();
    let out = Command::new(env!("CARGO_BIN_EXE_ctseg"))
        .arg("evaluate")
        .arg(dir.join("report_pred"))
        .arg(dir.join("report_label"))
        .args(["--case-id", "fixture", "--attention", "sk"])
        .args(extra)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn model_hashes_match_golden() {
    let golden = golden_hashes();
    for kind in AttentionKind::ALL {
        assert_eq!(&model_digest(kind), &golden[kind.name()], "variant {kind}");
    }
}

#[test]
fn reb_hash_matches_golden() {
    assert_eq!(reb_output().digest(), golden_hashes()["reb"]);
}

#[test]
fn report_fixture_volumes_are_current() {
    let (pred, label) = report_fixture_pair();
    let dir = fixtures();
    assert_eq!(read_volume(dir.join("report_label")).unwrap().data(), label.data());
    let stored = read_volume(dir.join("report_pred")).unwrap();
    for (a, b) in stored.data().iter().zip(pred.data()) {
        assert_eq!(*a, *b as f32 as f64);
    }
}

#[test]
fn golden_report_is_byte_identical() {
    let golden = fs::read(fixtures().join("report_golden.json")).unwrap();
    assert_eq!(evaluate(&[]), golden, "accelerated path");
}

#[test]
fn golden_report_matches_oracle_except_flag() {
    let golden = String::from_utf8(fs::read(fixtures().join("report_golden.json")).unwrap()).unwrap();
    let oracle = String::from_utf8(evaluate(&["--oracle"])).unwrap();
    assert_eq!(oracle.replace("\"oracle\": true", "\"oracle\": false"), golden);
}

/// Rewrites every frozen fixture. Run deliberately:
/// `cargo test -p ctseg --test golden -- --ignored bless`
#[test]
#[ignore = "regenerates fixtures"]
fn bless() {
    let dir = fixtures();
    let (pred, label) = report_fixture_pair();
    write_volume(&label, dir.join("report_label"), Dtype::U8).unwrap();
    write_volume(&pred, dir.join("report_pred"), Dtype::F32).unwrap();
    assert_eq!(read_volume(dir.join("report_pred")).unwrap().with_kind(VolumeKind::Probability).unwrap().dims(), pred.dims());

    // the golden report is frozen from the exhaustive path
    let oracle = String::from_utf8(evaluate(&["--oracle"])).unwrap();
    fs::write(dir.join("report_golden.json"), oracle.replace("\"oracle\": true", "\"oracle\": false")).unwrap();

    let mut hashes = std::collections::BTreeMap::new();
    for kind in AttentionKind::ALL {
        hashes.insert(kind.name().to_owned(), model_digest(kind));
    }
    hashes.insert("reb".to_owned(), reb_output().digest());
    let mut text = serde_json::to_string_pretty(&hashes).unwrap();
    text.push('\n');
    fs::write(golden_hashes_path(), text).unwrap();
}
