use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ctseg::io::{read_volume, write_volume, Dtype};
use ctseg::{Dims, Spacing, Volume, VolumeKind};

fn ctseg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctseg"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ctseg(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn cube_label(dir: &Path, name: &str, dims: Dims) {
    let v = Volume::from_fn(dims, Spacing::unit(), VolumeKind::Label, |[z, y, x]| {
        let inside = (2..dims.d - 2).contains(&z) && (2..dims.h - 2).contains(&y) && (2..dims.w - 2).contains(&x);
        if inside { 1.0 } else { 0.0 }
    })
    .unwrap();
    write_volume(&v, dir.join(name), Dtype::U8).unwrap();
}

#[test]
fn identical_volumes_score_perfectly() {
    let t = tempfile::tempdir().unwrap();
    cube_label(t.path(), "a", Dims::cube(8).unwrap());
    let text = ok(t.path(), &["evaluate", "a", "a"]);
    assert!(text.contains("\"dsc\": 100.00"), "{text}");
    assert!(text.contains("\"hd\": 0.0000"), "{text}");
    assert!(text.contains("\"case_id\": \"a\""), "{text}");
}

#[test]
fn mismatched_dims_name_both_triples() {
    let t = tempfile::tempdir().unwrap();
    cube_label(t.path(), "a", Dims::cube(8).unwrap());
    cube_label(t.path(), "b", Dims::new(8, 9, 8).unwrap());
    let out = ctseg(t.path(), &["evaluate", "a", "b"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("[8, 8, 8]") && msg.contains("[8, 9, 8]"), "{msg}");
    assert!(msg.contains("differs along h"), "{msg}");
}

#[test]
fn strict_mode_exits_2_on_undefined_metrics() {
    let t = tempfile::tempdir().unwrap();
    cube_label(t.path(), "a", Dims::cube(8).unwrap());
    let empty = Volume::filled(Dims::cube(8).unwrap(), Spacing::unit(), VolumeKind::Probability, 0.0).unwrap();
    write_volume(&empty, t.path().join("empty"), Dtype::F32).unwrap();
    let lenient = ctseg(t.path(), &["evaluate", "empty", "a"]);
    assert_eq!(lenient.status.code(), Some(0));
    let text = String::from_utf8(lenient.stdout).unwrap();
    assert!(text.contains("\"hd\": null"), "{text}");
    let strict = ctseg(t.path(), &["evaluate", "empty", "a", "--strict", "--format", "csv"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8(strict.stdout).unwrap().contains("undefined"));
}

#[test]
fn weights_must_sum_to_one() {
    let t = tempfile::tempdir().unwrap();
    cube_label(t.path(), "a", Dims::cube(8).unwrap());
    let out = ctseg(t.path(), &["evaluate", "a", "a", "--w1", "0.2", "--w2", "0.9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sum to 1"));
    let out = ctseg(t.path(), &["evaluate", "a", "a", "--theta-mm", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_attention_lists_choices() {
    let t = tempfile::tempdir().unwrap();
    let out = ctseg(t.path(), &["forward", "x", "--out", "y", "--attention", "vit"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    for name in ["none", "se", "sk", "cbam", "gate", "polar", "danet"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn missing_input_is_an_io_error() {
    let t = tempfile::tempdir().unwrap();
    let out = ctseg(t.path(), &["evaluate", "nope", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("nope"));
}

const CASE: &str = r#"{"case_id": "ID", "wdsc": 90.0, "dsc": DSC, "iou": 70.0, "sen": 80.0, "ppv": 85.0,
"hd": 2.5, "assd": 0.5, "so": 90.0, "sd": 91.0, "theta_mm": 1.0, "threshold": 0.5, "w1": 0.1, "w2": 0.9,
"hd_mode": "symmetric", "oracle": false, "attention": "sk", "preprocessing": "clahe>normalize", "conventions": "c"}"#;

#[test]
fn report_mean_row() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("b.json"), CASE.replace("ID", "b").replace("DSC", "90.0")).unwrap();
    fs::write(t.path().join("a.json"), CASE.replace("ID", "a").replace("DSC", "80.0")).unwrap();
    let csv = ok(t.path(), &["report", "b.json", "a.json"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("a,") && lines[2].starts_with("b,"), "sorted by case id");
    assert!(lines[3].starts_with("mean,90.00,85.00,"), "{}", lines[3]);
    let json = ok(t.path(), &["report", "a.json", "b.json", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["mean"]["dsc"].to_string(), "85.0");
    assert!(json.contains("\"dsc\": 85.00"));
}

#[test]
fn forward_variants_differ_and_repeat_exactly() {
    let t = tempfile::tempdir().unwrap();
    let input = Volume::from_fn(Dims::cube(8).unwrap(), Spacing::unit(), VolumeKind::Intensity, |[z, y, x]| {
        ((z * 7 + y * 3 + x) % 11) as f64 / 10.0
    })
    .unwrap();
    write_volume(&input, t.path().join("in"), Dtype::F32).unwrap();
    let digest = |attention: &str, out: &str| {
        let text = ok(t.path(), &["forward", "in", "--out", out, "--attention", attention, "--seed", "4"]);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["digest"].as_str().unwrap().to_owned()
    };
    let se = digest("se", "se");
    let danet = digest("danet", "danet");
    assert_ne!(se, danet);
    assert_eq!(digest("se", "se2"), se);
    let raw = |name: &str| fs::read(t.path().join(name)).unwrap();
    assert_eq!(raw("se.ctvol.raw"), raw("se2.ctvol.raw"));
    assert_eq!(raw("se_aux1.ctvol.raw"), raw("se2_aux1.ctvol.raw"));
    let main = read_volume(t.path().join("se")).unwrap();
    assert!(main.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn saved_params_reload_to_the_same_output() {
    let t = tempfile::tempdir().unwrap();
    let input = Volume::filled(Dims::cube(8).unwrap(), Spacing::unit(), VolumeKind::Intensity, 0.25).unwrap();
    write_volume(&input, t.path().join("in"), Dtype::F32).unwrap();
    let first = ok(t.path(), &["forward", "in", "--out", "a", "--attention", "gate", "--save-params", "w"]);
    let second = ok(t.path(), &["forward", "in", "--out", "a", "--attention", "gate", "--seed", "99", "--params", "w"]);
    let d = |s: &str| serde_json::from_str::<serde_json::Value>(s).unwrap()["digest"].clone();
    assert_eq!(d(&first), d(&second));
    let wrong = ctseg(t.path(), &["forward", "in", "--out", "a", "--attention", "se", "--params", "w"]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn loss_prints_json() {
    let t = tempfile::tempdir().unwrap();
    let dims = Dims::new(1, 1, 2).unwrap();
    let p = Volume::new(dims, Spacing::unit(), VolumeKind::Probability, vec![0.5, 0.5]).unwrap();
    let r = Volume::new(dims, Spacing::unit(), VolumeKind::Label, vec![1.0, 0.0]).unwrap();
    write_volume(&p, t.path().join("p"), Dtype::F32).unwrap();
    write_volume(&r, t.path().join("r"), Dtype::U8).unwrap();
    let text = ok(t.path(), &["loss", "p", "r", "--epsilon", "0"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["total"], 0.5);
    assert_eq!(v["fg_dice"], 0.5);
    assert_eq!(v["bg_dice"], 0.5);
}

#[test]
fn preprocess_with_resize() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["phantom", "--out-dir", "ph", "--dims", "8,48,40", "--teeth", "3"]);
    let text = ok(t.path(), &["preprocess", "ph/image", "pre", "--resize"]);
    assert!(text.contains("clahe>normalize>resize256"));
    let v = read_volume(t.path().join("pre")).unwrap();
    assert_eq!(v.dims(), Dims::new(8, 256, 256).unwrap());
    assert_eq!(v.min_max(), (0.0, 1.0));
    assert_eq!(v.spacing().dy, 0.25 * 48.0 / 256.0);
}

#[test]
fn oracle_and_default_reports_agree() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["phantom", "--out-dir", "ph", "--pred", "--dilate", "2", "--flip-rate", "0.01"]);
    let a = ok(t.path(), &["evaluate", "ph/pred", "ph/label"]);
    let b = ok(t.path(), &["evaluate", "ph/pred", "ph/label", "--oracle"]);
    assert_eq!(a, b.replace("\"oracle\": true", "\"oracle\": false"));
}

#[test]
fn phantom_is_deterministic() {
    let t = tempfile::tempdir().unwrap();
    ok(t.path(), &["phantom", "--out-dir", "x", "--noise", "0.05", "--appliance", "--seed", "3"]);
    ok(t.path(), &["phantom", "--out-dir", "y", "--noise", "0.05", "--appliance", "--seed", "3"]);
    for f in ["image.ctvol.raw", "image.ctvol.json", "label.ctvol.raw"] {
        assert_eq!(fs::read(t.path().join("x").join(f)).unwrap(), fs::read(t.path().join("y").join(f)).unwrap());
    }
}
