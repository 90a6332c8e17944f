//! Machine-readable per-case metric reports.
//!
//! Percentages are written with 2 decimals and millimeter values with 4.
//! An undefined metric is `null` in JSON and `undefined` in CSV.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

/// Marker written to CSV cells for undefined metrics.
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: String,
    #[serde(serialize_with = "pct")]
    pub wdsc: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub dsc: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub iou: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub sen: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub ppv: Option<f64>,
    #[serde(serialize_with = "mm")]
    pub hd: Option<f64>,
    #[serde(serialize_with = "mm")]
    pub assd: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub so: Option<f64>,
    #[serde(serialize_with = "pct")]
    pub sd: Option<f64>,
    #[serde(serialize_with = "mm_req")]
    pub theta_mm: f64,
    #[serde(serialize_with = "ratio")]
    pub threshold: f64,
    #[serde(serialize_with = "ratio")]
    pub w1: f64,
    #[serde(serialize_with = "ratio")]
    pub w2: f64,
    pub hd_mode: String,
    pub oracle: bool,
    pub attention: String,
    pub preprocessing: String,
    pub conventions: String,
}

/// Column order shared by JSON objects and the CSV header.
pub const FIELDS: [&str; 19] = [
    "case_id",
    "wdsc",
    "dsc",
    "iou",
    "sen",
    "ppv",
    "hd",
    "assd",
    "so",
    "sd",
    "theta_mm",
    "threshold",
    "w1",
    "w2",
    "hd_mode",
    "oracle",
    "attention",
    "preprocessing",
    "conventions",
];

/// The nine reported metrics.
pub const METRICS: [&str; 9] = ["wdsc", "dsc", "iou", "sen", "ppv", "hd", "assd", "so", "sd"];

#[derive(Debug, Clone, Copy)]
enum Unit {
    Percent,
    Millimeter,
    Ratio,
}

impl Unit {
    fn format(self, v: f64) -> String {
        // + 0.0 folds -0.0 into 0.0
        let v = v + 0.0;
        match self {
            Unit::Percent => format!("{v:.2}"),
            Unit::Millimeter | Unit::Ratio => format!("{v:.4}"),
        }
    }
}

fn fixed<S: Serializer>(v: Option<f64>, unit: Unit, s: S) -> Result<S::Ok, S::Error> {
    match v.filter(|x| x.is_finite()) {
        None => s.serialize_none(),
        Some(x) => {
            let raw = RawValue::from_string(unit.format(x)).map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        }
    }
}

fn pct<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    fixed(*v, Unit::Percent, s)
}

fn mm<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    fixed(*v, Unit::Millimeter, s)
}

fn mm_req<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    fixed(Some(*v), Unit::Millimeter, s)
}

fn ratio<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    fixed(Some(*v), Unit::Ratio, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidParameter(format!(
                "unknown report format {other:?} (expected json or csv)"
            ))),
        }
    }
}

impl CaseReport {
    /// The nine metric values in [`METRICS`] order.
    pub fn metrics(&self) -> [Option<f64>; 9] {
        [
            self.wdsc, self.dsc, self.iou, self.sen, self.ppv, self.hd, self.assd, self.so, self.sd,
        ]
    }

    fn numeric_columns(&self) -> [(Option<f64>, Unit); 13] {
        use Unit::*;
        [
            (self.wdsc, Percent),
            (self.dsc, Percent),
            (self.iou, Percent),
            (self.sen, Percent),
            (self.ppv, Percent),
            (self.hd, Millimeter),
            (self.assd, Millimeter),
            (self.so, Percent),
            (self.sd, Percent),
            (Some(self.theta_mm), Millimeter),
            (Some(self.threshold), Ratio),
            (Some(self.w1), Ratio),
            (Some(self.w2), Ratio),
        ]
    }

    fn text_columns(&self) -> [String; 5] {
        [
            self.hd_mode.clone(),
            self.oracle.to_string(),
            self.attention.clone(),
            self.preprocessing.clone(),
            self.conventions.clone(),
        ]
    }

    fn csv_record(&self) -> Vec<String> {
        let mut row = vec![self.case_id.clone()];
        row.extend(
            self.numeric_columns()
                .iter()
                .map(|&(v, unit)| cell(v, unit)),
        );
        row.extend(self.text_columns());
        row
    }
}

fn cell(v: Option<f64>, unit: Unit) -> String {
    match v.filter(|x| x.is_finite()) {
        Some(x) => unit.format(x),
        None => UNDEFINED.to_owned(),
    }
}

/// Numeric columns averaged over the cases where each is defined
/// (undefined when no case defines it).
fn numeric_means(reports: &[CaseReport]) -> Vec<(Option<f64>, Unit)> {
    let columns: Vec<_> = reports.iter().map(CaseReport::numeric_columns).collect();
    (0..columns[0].len())
        .map(|col| {
            let defined: Vec<f64> = columns.iter().filter_map(|c| c[col].0).collect();
            let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
            (mean, columns[0][col].1)
        })
        .collect()
}

/// Mean row; text columns are kept when all cases agree and left blank otherwise.
fn mean_record(reports: &[CaseReport]) -> Vec<String> {
    let mut row = vec!["mean".to_owned()];
    row.extend(numeric_means(reports).into_iter().map(|(v, unit)| cell(v, unit)));
    let texts: Vec<_> = reports.iter().map(CaseReport::text_columns).collect();
    for col in 0..texts[0].len() {
        let first = &texts[0][col];
        if texts.iter().all(|t| &t[col] == first) {
            row.push(first.clone());
        } else {
            row.push(String::new());
        }
    }
    row
}

struct MeanRow(Vec<(&'static str, Option<f64>, Unit)>);

impl Serialize for MeanRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        struct Cell(Option<f64>, Unit);
        impl Serialize for Cell {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                fixed(self.0, self.1, s)
            }
        }
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for &(name, v, unit) in &self.0 {
            map.serialize_entry(name, &Cell(v, unit))?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct Table<'a> {
    cases: &'a [CaseReport],
    mean: MeanRow,
}

/// Renders reports in the requested format. Deterministic for a given input order.
pub fn render_report(reports: &[CaseReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("report needs at least one case".into()));
    }
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(reports)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(FIELDS)?;
            for r in reports {
                w.write_record(r.csv_record())?;
            }
            w.write_record(mean_record(reports))?;
            finish_csv(w)
        }
    }
}

/// One case: a JSON object, or a CSV header plus one row.
pub fn render_case(report: &CaseReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report)?;
            text.push('\n');
            Ok(text)
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(FIELDS)?;
            w.write_record(report.csv_record())?;
            finish_csv(w)
        }
    }
}

/// Multi-case table with a mean row. JSON is `{"cases": [...], "mean": {...}}`
/// where `mean` holds the averaged numeric columns; CSV matches [`render_report`].
pub fn render_table(reports: &[CaseReport], format: ReportFormat) -> Result<String> {
    if reports.is_empty() {
        return Err(Error::InvalidParameter("report needs at least one case".into()));
    }
    match format {
        ReportFormat::Csv => render_report(reports, format),
        ReportFormat::Json => {
            let mean = MeanRow(
                FIELDS[1..]
                    .iter()
                    .zip(numeric_means(reports))
                    .map(|(&name, (v, unit))| (name, v, unit))
                    .collect(),
            );
            let mut text = serde_json::to_string_pretty(&Table { cases: reports, mean })?;
            text.push('\n');
            Ok(text)
        }
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_report(reports: &[CaseReport], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(reports, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Parses a JSON report: a single object, an array of them, or a table
/// written by [`render_table`].
pub fn parse_reports(bytes: &[u8]) -> Result<Vec<CaseReport>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<CaseReport>),
        One(Box<CaseReport>),
        Table { cases: Vec<CaseReport> },
    }
    Ok(match serde_json::from_slice(bytes)? {
        OneOrMany::Many(v) => v,
        OneOrMany::One(r) => vec![*r],
        OneOrMany::Table { cases } => cases,
    })
}
