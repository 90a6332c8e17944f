//! Read-only support for uncompressed single-file NIfTI-1 (`.nii`) volumes.
//!
//! Only 3D images with datatype `u8` (2), `i16` (4) or `f32` (16) are
//! accepted. Byte order is detected from `sizeof_hdr`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume, VolumeKind};

pub const HEADER_SIZE: usize = 348;

mod offsets {
    pub const SIZEOF_HDR: usize = 0;
    pub const DIM: usize = 40;
    pub const DATATYPE: usize = 70;
    pub const BITPIX: usize = 72;
    pub const PIXDIM: usize = 76;
    pub const VOX_OFFSET: usize = 108;
    pub const SCL_SLOPE: usize = 112;
    pub const SCL_INTER: usize = 116;
    pub const MAGIC: usize = 344;
}

pub const DT_UINT8: i16 = 2;
pub const DT_INT16: i16 = 4;
pub const DT_FLOAT32: i16 = 16;

/// The subset of header fields this reader uses.
#[derive(Debug, Clone, PartialEq)]
pub struct NiftiHeader {
    pub dim: [i16; 8],
    pub datatype: i16,
    pub bitpix: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub little_endian: bool,
}

struct Reader<'a> {
    bytes: &'a [u8],
    little: bool,
}

impl Reader<'_> {
    fn i16(&self, at: usize) -> i16 {
        let b = [self.bytes[at], self.bytes[at + 1]];
        if self.little {
            i16::from_le_bytes(b)
        } else {
            i16::from_be_bytes(b)
        }
    }

    fn f32(&self, at: usize) -> f32 {
        let b = [
            self.bytes[at],
            self.bytes[at + 1],
            self.bytes[at + 2],
            self.bytes[at + 3],
        ];
        if self.little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    }
}

impl NiftiHeader {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(Error::Header(format!(
                "NIfTI-1 header needs {HEADER_SIZE} bytes, got {}",
                bytes.len()
            )));
        }
        let raw = [bytes[0], bytes[1], bytes[2], bytes[3]];
        let little = if i32::from_le_bytes(raw) == HEADER_SIZE as i32 {
            true
        } else if i32::from_be_bytes(raw) == HEADER_SIZE as i32 {
            false
        } else {
            return Err(Error::Header(format!(
                "sizeof_hdr is {}, expected {HEADER_SIZE}",
                i32::from_le_bytes(raw)
            )));
        };
        debug_assert_eq!(offsets::SIZEOF_HDR, 0);

        let magic = &bytes[offsets::MAGIC..offsets::MAGIC + 4];
        if magic != b"n+1\0" {
            return Err(Error::UnsupportedFormat(format!(
                "NIfTI magic {:?} (only single-file \"n+1\" is supported)",
                String::from_utf8_lossy(magic)
            )));
        }

        let r = Reader { bytes, little };
        let mut dim = [0i16; 8];
        for (i, d) in dim.iter_mut().enumerate() {
            *d = r.i16(offsets::DIM + 2 * i);
        }
        let mut pixdim = [0f32; 8];
        for (i, p) in pixdim.iter_mut().enumerate() {
            *p = r.f32(offsets::PIXDIM + 4 * i);
        }
        Ok(Self {
            dim,
            datatype: r.i16(offsets::DATATYPE),
            bitpix: r.i16(offsets::BITPIX),
            pixdim,
            vox_offset: r.f32(offsets::VOX_OFFSET),
            scl_slope: r.f32(offsets::SCL_SLOPE),
            scl_inter: r.f32(offsets::SCL_INTER),
            little_endian: little,
        })
    }

    /// Volume extent as `(D, H, W) = (dim[3], dim[2], dim[1])`.
    pub fn dims(&self) -> Result<Dims> {
        if self.dim[0] != 3 {
            return Err(Error::UnsupportedFormat(format!(
                "dim[0] is {}, only 3D images are supported",
                self.dim[0]
            )));
        }
        let axis = |i: usize| -> Result<usize> {
            usize::try_from(self.dim[i])
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Header(format!("dim[{i}] = {} is not positive", self.dim[i])))
        };
        Dims::new(axis(3)?, axis(2)?, axis(1)?)
    }

    /// Voxel size as `(pixdim[3], pixdim[2], pixdim[1])`. Signs are dropped.
    pub fn spacing(&self) -> Result<Spacing> {
        let p = |i: usize| f64::from(self.pixdim[i]).abs();
        Spacing::new(p(3), p(2), p(1))
    }

    fn voxel_size(&self) -> Result<usize> {
        let size = match self.datatype {
            DT_UINT8 => 1,
            DT_INT16 => 2,
            DT_FLOAT32 => 4,
            other => {
                return Err(Error::UnsupportedDatatype(format!(
                    "NIfTI datatype code {other}"
                )))
            }
        };
        if self.bitpix != 8 * size as i16 {
            return Err(Error::Header(format!(
                "bitpix {} inconsistent with datatype {}",
                self.bitpix, self.datatype
            )));
        }
        Ok(size)
    }

    fn data_offset(&self) -> Result<usize> {
        let off = self.vox_offset;
        if !off.is_finite() || off < HEADER_SIZE as f32 || off > u32::MAX as f32 {
            return Err(Error::Header(format!("vox_offset {off} is out of range")));
        }
        Ok(off as usize)
    }
}

/// Decodes a complete in-memory `.nii` file.
pub fn parse_nifti(bytes: &[u8]) -> Result<Volume> {
    let header = NiftiHeader::parse(bytes)?;
    let dims = header.dims()?;
    let size = header.voxel_size()?;
    let spacing = header.spacing()?;
    let offset = header.data_offset()?;
    let needed = dims
        .checked_len()
        .and_then(|n| n.checked_mul(size))
        .ok_or(Error::InvalidDims(dims.as_array()))?;
    let available = bytes.len().saturating_sub(offset);
    if available < needed {
        return Err(Error::BlobLength {
            expected: needed,
            actual: available,
        });
    }
    let body = &bytes[offset..offset + needed];
    let r = Reader {
        bytes: body,
        little: header.little_endian,
    };
    let mut data: Vec<f64> = match header.datatype {
        DT_UINT8 => body.iter().map(|&b| f64::from(b)).collect(),
        DT_INT16 => (0..dims.len()).map(|i| f64::from(r.i16(2 * i))).collect(),
        _ => (0..dims.len()).map(|i| f64::from(r.f32(4 * i))).collect(),
    };
    let slope = f64::from(header.scl_slope);
    let inter = f64::from(header.scl_inter);
    if slope != 0.0 && slope.is_finite() && inter.is_finite() && (slope != 1.0 || inter != 0.0) {
        for v in &mut data {
            *v = *v * slope + inter;
        }
    }
    Volume::new(dims, spacing, VolumeKind::Intensity, data)
}

pub fn read_nifti(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_nifti(&bytes)
}
