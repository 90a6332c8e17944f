//! Native volume format: a JSON sidecar (`<stem>.ctvol.json`) describing a
//! raw little-endian blob (`<stem>.ctvol.raw`) in z-major order.
//!
//! ```json
//! {"dims":[D,H,W],"spacing_mm":[dz,dy,dx],"dtype":"f32","order":"zyx","endianness":"little"}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume, VolumeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    I16,
    F32,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::U8 => 1,
            Dtype::I16 => 2,
            Dtype::F32 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dtype::U8 => "u8",
            Dtype::I16 => "i16",
            Dtype::F32 => "f32",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtvolHeader {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    pub dtype: Dtype,
    pub order: String,
    pub endianness: String,
}

impl CtvolHeader {
    pub fn new(dims: Dims, spacing: Spacing, dtype: Dtype) -> Self {
        Self {
            dims: dims.as_array(),
            spacing_mm: spacing.as_array(),
            dtype,
            order: "zyx".to_owned(),
            endianness: "little".to_owned(),
        }
    }

    /// Parses and validates sidecar bytes.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let header: CtvolHeader =
            serde_json::from_slice(bytes).map_err(|e| Error::Header(e.to_string()))?;
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order != "zyx" {
            return Err(Error::Header(format!("order must be \"zyx\", got {:?}", self.order)));
        }
        if self.endianness != "little" {
            return Err(Error::Header(format!(
                "endianness must be \"little\", got {:?}",
                self.endianness
            )));
        }
        self.volume_dims()?;
        self.spacing()?;
        self.blob_len()?;
        Ok(())
    }

    pub fn volume_dims(&self) -> Result<Dims> {
        let [d, h, w] = self.dims;
        Dims::new(d, h, w)
    }

    pub fn spacing(&self) -> Result<Spacing> {
        let [dz, dy, dx] = self.spacing_mm;
        Spacing::new(dz, dy, dx)
    }

    /// Expected blob size in bytes.
    pub fn blob_len(&self) -> Result<usize> {
        self.volume_dims()?
            .checked_len()
            .and_then(|n| n.checked_mul(self.dtype.size()))
            .ok_or(Error::InvalidDims(self.dims))
    }
}

/// Decodes a blob against its header. The result is an intensity volume;
/// callers reinterpret it with [`Volume::with_kind`].
pub fn decode_blob(header: &CtvolHeader, blob: &[u8]) -> Result<Volume> {
    header.validate()?;
    let expected = header.blob_len()?;
    if blob.len() != expected {
        return Err(Error::BlobLength {
            expected,
            actual: blob.len(),
        });
    }
    let data: Vec<f64> = match header.dtype {
        Dtype::U8 => blob.iter().map(|&b| f64::from(b)).collect(),
        Dtype::I16 => blob
            .chunks_exact(2)
            .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])))
            .collect(),
        Dtype::F32 => blob
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect(),
    };
    Volume::new(header.volume_dims()?, header.spacing()?, VolumeKind::Intensity, data)
}

/// Encodes voxel values. Integer dtypes require integral in-range values;
/// `f32` rounds to nearest and rejects values outside the finite `f32` range.
pub fn encode_blob(v: &Volume, dtype: Dtype) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(v.data().len() * dtype.size());
    for &x in v.data() {
        match dtype {
            Dtype::U8 => {
                if x.fract() != 0.0 || !(0.0..=255.0).contains(&x) {
                    return Err(Error::Unrepresentable { dtype: "u8", value: x });
                }
                out.push(x as u8);
            }
            Dtype::I16 => {
                if x.fract() != 0.0 || !(-32768.0..=32767.0).contains(&x) {
                    return Err(Error::Unrepresentable { dtype: "i16", value: x });
                }
                out.extend_from_slice(&(x as i16).to_le_bytes());
            }
            Dtype::F32 => {
                let f = x as f32;
                if !f.is_finite() {
                    return Err(Error::Unrepresentable { dtype: "f32", value: x });
                }
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
    }
    Ok(out)
}

/// Sidecar and blob paths for a volume path. Accepts the bare stem, the stem
/// with `.ctvol`, or either of the two concrete files.
pub fn ctvol_paths(path: &Path) -> (PathBuf, PathBuf) {
    let s = path.to_string_lossy();
    let stem = [".ctvol.json", ".ctvol.raw", ".ctvol"]
        .iter()
        .find_map(|suffix| s.strip_suffix(suffix))
        .unwrap_or(&s)
        .to_owned();
    (
        PathBuf::from(format!("{stem}.ctvol.json")),
        PathBuf::from(format!("{stem}.ctvol.raw")),
    )
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let (json, raw) = ctvol_paths(path.as_ref());
    let header_bytes = fs::read(&json).map_err(|e| Error::io(&json, e))?;
    let header = CtvolHeader::parse(&header_bytes)?;
    let blob = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;
    decode_blob(&header, &blob)
}

/// Writes the sidecar and blob pair; returns the sidecar path.
pub fn write_volume(v: &Volume, path: impl AsRef<Path>, dtype: Dtype) -> Result<PathBuf> {
    let (json, raw) = ctvol_paths(path.as_ref());
    let header = CtvolHeader::new(v.dims(), v.spacing(), dtype);
    let blob = encode_blob(v, dtype)?;
    let mut text = serde_json::to_string_pretty(&header)?;
    text.push('\n');
    fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    fs::write(&raw, blob).map_err(|e| Error::io(&raw, e))?;
    Ok(json)
}
