use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::volume::{Dims, Spacing, Volume, VolumeKind};

/// Rank-5 `(batch, channel, depth, height, width)` array, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor5 {
    shape: [usize; 5],
    data: Vec<f64>,
}

impl Tensor5 {
    pub fn new(shape: [usize; 5], data: Vec<f64>) -> Result<Self> {
        let len = shape.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        if len != Some(data.len()) {
            return Err(Error::Shape(format!(
                "{} values cannot fill shape {shape:?}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Shape(format!("non-finite value {} at {i}", data[i])));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: [usize; 5]) -> Self {
        Self {
            shape,
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn full(shape: [usize; 5], value: f64) -> Self {
        Self {
            shape,
            data: vec![value; shape.iter().product()],
        }
    }

    /// Internal constructor for buffers that already match `shape`.
    pub(crate) fn from_raw(shape: [usize; 5], data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn shape(&self) -> [usize; 5] {
        self.shape
    }

    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn channels(&self) -> usize {
        self.shape[1]
    }

    pub fn spatial(&self) -> [usize; 3] {
        [self.shape[2], self.shape[3], self.shape[4]]
    }

    /// Voxels per `(batch, channel)` slab.
    pub fn slab_len(&self) -> usize {
        self.shape[2] * self.shape[3] * self.shape[4]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn slab(&self, b: usize, c: usize) -> &[f64] {
        let n = self.slab_len();
        let start = (b * self.shape[1] + c) * n;
        &self.data[start..start + n]
    }

    /// All channels of one batch item.
    pub fn item(&self, b: usize) -> &[f64] {
        let n = self.shape[1] * self.slab_len();
        &self.data[b * n..(b + 1) * n]
    }

    pub fn get(&self, [b, c, z, y, x]: [usize; 5]) -> f64 {
        let [_, ch, d, h, w] = self.shape;
        self.data[(((b * ch + c) * d + z) * h + y) * w + x]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.shape, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Tensor5, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::Shape(format!(
                "elementwise op on {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Self::from_raw(
            self.shape,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Tensor5) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Concatenates along the channel axis.
    pub fn concat_channels(&self, other: &Tensor5) -> Result<Self> {
        let [b, c1, d, h, w] = self.shape;
        let [b2, c2, d2, h2, w2] = other.shape;
        if (b, d, h, w) != (b2, d2, h2, w2) {
            return Err(Error::Shape(format!(
                "cannot concatenate {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        for i in 0..b {
            data.extend_from_slice(self.item(i));
            data.extend_from_slice(other.item(i));
        }
        Ok(Self::from_raw([b, c1 + c2, d, h, w], data))
    }

    /// `(1, 1, D, H, W)` tensor holding a volume's voxels.
    pub fn from_volume(v: &Volume) -> Self {
        let Dims { d, h, w } = v.dims();
        Self::from_raw([1, 1, d, h, w], v.data().to_vec())
    }

    /// Extracts one `(batch, channel)` slab as a volume.
    pub fn to_volume(&self, b: usize, c: usize, spacing: Spacing, kind: VolumeKind) -> Result<Volume> {
        let [d, h, w] = self.spatial();
        Volume::new(Dims::new(d, h, w)?, spacing, kind, self.slab(b, c).to_vec())
    }

    /// SHA-256 of the shape and little-endian voxel bytes, hex encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        self.feed(&mut hasher);
        hex::encode(hasher.finalize())
    }

    pub(crate) fn feed(&self, hasher: &mut Sha256) {
        for n in self.shape {
            hasher.update((n as u64).to_le_bytes());
        }
        for v in &self.data {
            hasher.update(v.to_le_bytes());
        }
    }
}
