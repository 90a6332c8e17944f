use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use ctseg::io::{
    ctvol_paths, parse_reports, read_any, read_volume, render_case, render_table, write_volume, CaseReport, Dtype,
    ReportFormat,
};
use ctseg::loss::{weighted_dice_loss, LossConfig};
use ctseg::metrics::{check_weights, evaluate_case, DistanceMethod, EvalConfig, HausdorffMode};
use ctseg::nn::{model_forward, AttentionKind, ModelConfig, ModelParams, Tensor5};
use ctseg::phantom::{generate_phantom, perturb_prediction, PhantomSpec};
use ctseg::preprocess::{clahe_volume, normalize_volume, resize_axial, ClaheParams, PIPELINE, TARGET_HW};
use ctseg::{Dims, Spacing, Volume, VolumeKind};

const EXIT_UNDEFINED: u8 = 2;

#[derive(Parser)]
#[command(name = "ctseg", version, about = "Tooth segmentation pipeline: phantoms, preprocessing, inference, loss and metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic jaw volume with tooth labels
    Phantom(PhantomArgs),
    /// CLAHE per axial slice, min-max normalization, optional 256x256 resize
    Preprocess(PreprocessArgs),
    /// Run the segmentation network with seeded weights
    Forward(ForwardArgs),
    /// Weighted dice loss of a probability map against a label
    Loss(LossArgs),
    /// Per-case metric report for a prediction against a reference label
    Evaluate(EvaluateArgs),
    /// Aggregate case reports into one table with a mean row
    Report(ReportArgs),
}

#[derive(Args)]
struct Weights {
    /// Foreground dice weight
    #[arg(long, default_value_t = 0.1)]
    w1: f64,
    /// Background dice weight; w1 + w2 must equal 1
    #[arg(long, default_value_t = 0.9)]
    w2: f64,
}

impl Weights {
    fn check(&self) -> Result<()> {
        check_weights(self.w1, self.w2)?;
        Ok(())
    }
}

#[derive(Args)]
struct PhantomArgs {
    /// Output directory; receives `image`, `label` and optionally `pred`
    #[arg(long)]
    out_dir: PathBuf,
    /// Volume size as D,H,W
    #[arg(long, value_parser = parse_dims, default_value = "32,64,64")]
    dims: Dims,
    /// Voxel spacing in mm as dz,dy,dx
    #[arg(long, value_parser = parse_spacing, default_value = "0.3,0.25,0.25")]
    spacing: Spacing,
    #[arg(long, default_value_t = 8)]
    teeth: usize,
    #[arg(long)]
    missing_teeth: bool,
    #[arg(long)]
    appliance: bool,
    /// Gaussian noise sigma on the intensity image
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a perturbed probability map `pred`
    #[arg(long)]
    pred: bool,
    /// 6-connected dilation steps for `pred`
    #[arg(long, default_value_t = 1)]
    dilate: usize,
    /// Voxel flip rate for `pred`
    #[arg(long, default_value_t = 0.0)]
    flip_rate: f64,
}

#[derive(Args)]
struct PreprocessArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    clip_limit: f64,
    /// Tile grid edge per slice
    #[arg(long, default_value_t = 8)]
    tiles: usize,
    #[arg(long, default_value_t = 256)]
    bins: usize,
    /// Resize every axial slice to 256x256 after normalization
    #[arg(long)]
    resize: bool,
}

#[derive(Args)]
struct ForwardArgs {
    input: PathBuf,
    /// Output path for the main probability map; auxiliary maps get an `_auxN` suffix
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_attention, default_value = "sk")]
    attention: AttentionKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    base_channels: usize,
    /// Skip the deep-supervision heads
    #[arg(long)]
    no_ds: bool,
    /// Load a flat parameter vector instead of seeding
    #[arg(long)]
    params: Option<PathBuf>,
    /// Save the parameter vector used
    #[arg(long)]
    save_params: Option<PathBuf>,
}

#[derive(Args)]
struct LossArgs {
    pred: PathBuf,
    label: PathBuf,
    #[command(flatten)]
    weights: Weights,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

#[derive(Args)]
struct EvaluateArgs {
    pred: PathBuf,
    reference: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Surface tolerance in mm
    #[arg(long, default_value_t = 1.0)]
    theta_mm: f64,
    #[command(flatten)]
    weights: Weights,
    /// Force the exhaustive pairwise distance computation
    #[arg(long)]
    oracle: bool,
    /// Exit with status 2 when any metric is undefined
    #[arg(long)]
    strict: bool,
    /// Hausdorff combination: symmetric or literal-sum
    #[arg(long, value_parser = parse_hd_mode, default_value = "symmetric")]
    hd_mode: HausdorffMode,
    #[arg(long, value_parser = parse_format, default_value = "json")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to the prediction file stem
    #[arg(long)]
    case_id: Option<String>,
    /// Attention variant that produced the prediction, recorded in the report
    #[arg(long, value_parser = parse_attention)]
    attention: Option<AttentionKind>,
    /// Preprocessing applied to the input, recorded in the report
    #[arg(long, default_value = PIPELINE)]
    preprocessing: String,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON case reports (single objects, arrays or tables)
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated values, got '{s}'"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(out)
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let [d, h, w] = parse_triple(s)?;
    let as_count = |v: f64| {
        if v.fract() == 0.0 && v >= 1.0 {
            Ok(v as usize)
        } else {
            Err(format!("'{v}' is not a positive integer"))
        }
    };
    Dims::new(as_count(d)?, as_count(h)?, as_count(w)?).map_err(|e| e.to_string())
}

fn parse_spacing(s: &str) -> Result<Spacing, String> {
    let [dz, dy, dx] = parse_triple(s)?;
    Spacing::new(dz, dy, dx).map_err(|e| e.to_string())
}

fn parse_attention(s: &str) -> Result<AttentionKind, String> {
    s.parse().map_err(|e: ctseg::Error| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: ctseg::Error| e.to_string())
}

fn parse_hd_mode(s: &str) -> Result<HausdorffMode, String> {
    [HausdorffMode::Symmetric, HausdorffMode::LiteralSum]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| format!("unknown Hausdorff mode '{s}' (valid: symmetric, literal-sum)"))
}

/// File name without the volume or report extensions.
fn case_id_of(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    for suffix in [".ctvol.json", ".ctvol.raw", ".ctvol", ".nii", ".json"] {
        if let Some(stem) = name.strip_suffix(suffix) {
            return stem.to_owned();
        }
    }
    name
}

fn read_as(path: &Path, kind: VolumeKind) -> Result<Volume> {
    let v = read_any(path).with_context(|| format!("reading {}", path.display()))?;
    v.with_kind(kind)
        .with_context(|| format!("{} is not a valid {} volume", path.display(), kind.name()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cmd_phantom(a: PhantomArgs) -> Result<ExitCode> {
    let spec = PhantomSpec {
        dims: a.dims,
        spacing: a.spacing,
        tooth_count: a.teeth,
        missing_teeth: a.missing_teeth,
        appliance: a.appliance,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    let ph = generate_phantom(&spec)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let image = write_volume(&ph.image, a.out_dir.join("image"), Dtype::F32)?;
    let label = write_volume(&ph.label, a.out_dir.join("label"), Dtype::U8)?;
    let pred = if a.pred {
        let p = perturb_prediction(&ph.label, a.dilate, a.flip_rate, a.seed)?;
        Some(write_volume(&p, a.out_dir.join("pred"), Dtype::F32)?)
    } else {
        None
    };
    print_json(&json!({
        "image": image,
        "label": label,
        "pred": pred,
        "teeth": ph.teeth.len(),
        "label_voxels": ph.label.foreground_count(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_preprocess(a: PreprocessArgs) -> Result<ExitCode> {
    let params = ClaheParams {
        clip_limit: a.clip_limit,
        tiles: (a.tiles, a.tiles),
        bins: a.bins,
    };
    let v = read_as(&a.input, VolumeKind::Intensity)?;
    let mut out = normalize_volume(&clahe_volume(&v, &params)?)?;
    let mut pipeline = PIPELINE.to_owned();
    if a.resize {
        out = resize_axial(&out, TARGET_HW.0, TARGET_HW.1)?;
        pipeline.push_str(">resize256");
    }
    let written = write_volume(&out, &a.output, Dtype::F32)?;
    print_json(&json!({ "output": written, "pipeline": pipeline, "dims": out.dims().as_array() }))?;
    Ok(ExitCode::SUCCESS)
}

/// Path stem shared by a main output and its auxiliary maps.
fn output_stem(path: &Path) -> String {
    let (header, _) = ctvol_paths(path);
    let s = header.to_string_lossy();
    s.strip_suffix(".ctvol.json").unwrap_or(&s).to_owned()
}

fn cmd_forward(a: ForwardArgs) -> Result<ExitCode> {
    let cfg = ModelConfig {
        base_channels: a.base_channels,
        attention: a.attention,
        ds_heads: !a.no_ds,
        seed: a.seed,
        ..ModelConfig::default()
    };
    let params = match &a.params {
        Some(p) => {
            let flat = read_volume(p).with_context(|| format!("reading parameters {}", p.display()))?;
            ModelParams::from_flat(&cfg, flat.data())?
        }
        None => ModelParams::init(&cfg)?,
    };
    if let Some(p) = &a.save_params {
        let flat = params.to_flat();
        let v = Volume::new(Dims::new(1, 1, flat.len())?, Spacing::unit(), VolumeKind::Intensity, flat)?;
        write_volume(&v, p, Dtype::F32)?;
    }

    let input = read_as(&a.input, VolumeKind::Intensity)?;
    let out = model_forward(&Tensor5::from_volume(&input), &cfg, &params)?;
    let spacing = input.spacing();
    let main = out.main.to_volume(0, 0, spacing, VolumeKind::Probability)?;
    let main_path = write_volume(&main, &a.out, Dtype::F32)?;
    let stem = output_stem(&a.out);
    let mut aux_paths = Vec::new();
    for (k, map) in out.aux.iter().enumerate() {
        let v = map.to_volume(0, 0, spacing, VolumeKind::Probability)?;
        aux_paths.push(write_volume(&v, format!("{stem}_aux{}", k + 1), Dtype::F32)?);
    }
    print_json(&json!({
        "main": main_path,
        "aux": aux_paths,
        "attention": cfg.attention.name(),
        "seed": cfg.seed,
        "base_channels": cfg.base_channels,
        "digest": out.digest(),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_loss(a: LossArgs) -> Result<ExitCode> {
    a.weights.check()?;
    let cfg = LossConfig::new(a.weights.w1, a.weights.w2, a.epsilon)?;
    let p = read_as(&a.pred, VolumeKind::Probability)?;
    let r = read_as(&a.label, VolumeKind::Label)?;
    let l = weighted_dice_loss(&p, &r, &cfg)?;
    print_json(&json!({
        "total": l.total,
        "fg_dice": l.fg_dice,
        "bg_dice": l.bg_dice,
        "w1": cfg.w1,
        "w2": cfg.w2,
        "epsilon": cfg.epsilon,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<ExitCode> {
    a.weights.check()?;
    let cfg = EvalConfig {
        threshold: a.threshold,
        theta_mm: a.theta_mm,
        w1: a.weights.w1,
        w2: a.weights.w2,
        method: if a.oracle {
            DistanceMethod::Exhaustive
        } else {
            DistanceMethod::Accelerated
        },
        hd_mode: a.hd_mode,
    };
    let p = read_as(&a.pred, VolumeKind::Probability)?;
    let r = read_as(&a.reference, VolumeKind::Label)?;
    let case_id = a.case_id.clone().unwrap_or_else(|| case_id_of(&a.pred));
    let mut report = evaluate_case(&case_id, &p, &r, &cfg).with_context(|| {
        format!(
            "evaluating {} against {}",
            a.pred.display(),
            a.reference.display()
        )
    })?;
    report.attention = a.attention.map_or_else(|| "unspecified".to_owned(), |k| k.name().to_owned());
    report.preprocessing = a.preprocessing.clone();
    emit(&render_case(&report, a.format)?, a.out.as_deref())?;

    let undefined: Vec<&str> = ctseg::io::METRICS
        .iter()
        .zip(report.metrics())
        .filter(|(_, v)| v.is_none())
        .map(|(n, _)| *n)
        .collect();
    if !undefined.is_empty() {
        eprintln!("warning: undefined metrics: {}", undefined.join(", "));
        if a.strict {
            return Ok(ExitCode::from(EXIT_UNDEFINED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(a: ReportArgs) -> Result<ExitCode> {
    let per_file: Vec<Vec<CaseReport>> = a
        .reports
        .par_iter()
        .map(|p| {
            let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
            parse_reports(&bytes).with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<_>>()?;
    let mut cases: Vec<CaseReport> = per_file.into_iter().flatten().collect();
    cases.sort_by(|x, y| x.case_id.cmp(&y.case_id));
    if cases.is_empty() {
        bail!("no case reports found");
    }
    emit(&render_table(&cases, a.format)?, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Preprocess(a) => cmd_preprocess(a),
        Command::Forward(a) => cmd_forward(a),
        Command::Loss(a) => cmd_loss(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the generic failure code; 2 is reserved for --strict
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
