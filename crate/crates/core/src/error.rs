use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spacing ({dz}, {dy}, {dx}): every component must be finite and > 0")]
    InvalidSpacing { dz: f64, dy: f64, dx: f64 },

    #[error("invalid dimensions {0:?}: every axis must be > 0 and the voxel count must fit in memory")]
    InvalidDims([usize; 3]),

    #[error("data length {actual} does not match dims {dims:?} ({expected} voxels)")]
    DataLength {
        dims: [usize; 3],
        expected: usize,
        actual: usize,
    },

    #[error("expected a {expected} volume, got {actual}")]
    WrongKind {
        expected: &'static str,
        actual: &'static str,
    },

    #[error("value {value} at voxel {index} is not valid for a {kind} volume")]
    InvalidValue {
        kind: &'static str,
        index: usize,
        value: f64,
    },

    #[error("dimension mismatch: {left:?} vs {right:?} (differs along {})", differing_axes(left, right))]
    DimMismatch { left: [usize; 3], right: [usize; 3] },

    #[error("spacing mismatch: {left:?} vs {right:?}")]
    SpacingMismatch { left: [f64; 3], right: [f64; 3] },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is undefined for empty input")]
    UndefinedMetric(&'static str),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("unsupported datatype: {0}")]
    UnsupportedDatatype(String),

    #[error("blob length {actual} bytes does not match header ({expected} bytes expected)")]
    BlobLength { expected: usize, actual: usize },

    #[error("value {value} cannot be stored losslessly as {dtype}")]
    Unrepresentable { dtype: &'static str, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Axis names (`d`, `h`, `w`) whose extents differ.
fn differing_axes(left: &[usize; 3], right: &[usize; 3]) -> String {
    let names: Vec<&str> = ["d", "h", "w"]
        .into_iter()
        .zip(left.iter().zip(right))
        .filter(|(_, (a, b))| a != b)
        .map(|(n, _)| n)
        .collect();
    names.join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
