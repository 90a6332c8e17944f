//! Volume and report file formats.

mod ctvol;
mod nifti;
mod report;

use std::path::Path;

pub use ctvol::{ctvol_paths, decode_blob, encode_blob, read_volume, write_volume, CtvolHeader, Dtype};
pub use nifti::{parse_nifti, read_nifti, NiftiHeader};
pub use report::{parse_reports, render_case, render_report, render_table, write_report, CaseReport, ReportFormat, FIELDS, METRICS, UNDEFINED};

use crate::error::Result;
use crate::volume::Volume;

/// Reads a `.nii` file or a `.ctvol` pair, chosen by extension.
pub fn read_any(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("nii")) {
        read_nifti(path)
    } else {
        read_volume(path)
    }
}
