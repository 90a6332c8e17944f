//! Volumes, masks, voxel spacing and boundary extraction.
//!
//! Every volume is stored z-major: index `(z, y, x)` lives at
//! `(z * H + y) * W + x`, matching a stack of axial CT slices.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// Physical voxel size in millimeters along depth, height and width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spacing {
    pub dz: f64,
    pub dy: f64,
    pub dx: f64,
}

impl Spacing {
    pub fn new(dz: f64, dy: f64, dx: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(dz) && ok(dy) && ok(dx) {
            Ok(Self { dz, dy, dx })
        } else {
            Err(Error::InvalidSpacing { dz, dy, dx })
        }
    }

    pub fn isotropic(mm: f64) -> Result<Self> {
        Self::new(mm, mm, mm)
    }

    pub fn unit() -> Self {
        Self {
            dz: 1.0,
            dy: 1.0,
            dx: 1.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.dz, self.dy, self.dx]
    }

    /// Physical position of a voxel index.
    pub fn to_mm(&self, [z, y, x]: [usize; 3]) -> [f64; 3] {
        [z as f64 * self.dz, y as f64 * self.dy, x as f64 * self.dx]
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self::unit()
    }
}

/// Grid extent `(D, H, W)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub d: usize,
    pub h: usize,
    pub w: usize,
}

impl Dims {
    pub fn new(d: usize, h: usize, w: usize) -> Result<Self> {
        let dims = Self { d, h, w };
        match dims.checked_len() {
            Some(n) if n > 0 => Ok(dims),
            _ => Err(Error::InvalidDims([d, h, w])),
        }
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn checked_len(&self) -> Option<usize> {
        self.d.checked_mul(self.h)?.checked_mul(self.w)
    }

    pub fn len(&self) -> usize {
        self.d * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.d, self.h, self.w]
    }

    #[inline]
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.h + y) * self.w + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> [usize; 3] {
        let x = index % self.w;
        let rest = index / self.w;
        [rest / self.h, rest % self.h, x]
    }

    /// In-bounds 6-connected neighbors of a voxel.
    pub fn neighbors6(&self, [z, y, x]: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
        let dims = *self;
        const STEPS: [[isize; 3]; 6] = [
            [-1, 0, 0],
            [1, 0, 0],
            [0, -1, 0],
            [0, 1, 0],
            [0, 0, -1],
            [0, 0, 1],
        ];
        STEPS.into_iter().filter_map(move |[dz, dy, dx]| {
            let nz = z.checked_add_signed(dz)?;
            let ny = y.checked_add_signed(dy)?;
            let nx = x.checked_add_signed(dx)?;
            (nz < dims.d && ny < dims.h && nx < dims.w).then_some([nz, ny, nx])
        })
    }

    /// True when the voxel touches the grid boundary along any axis.
    pub fn on_border(&self, [z, y, x]: [usize; 3]) -> bool {
        z == 0 || y == 0 || x == 0 || z + 1 == self.d || y + 1 == self.h || x + 1 == self.w
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.d, self.h, self.w)
    }
}

/// What the scalars of a [`Volume`] mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolumeKind {
    Intensity,
    /// Binary mask with values in {0, 1}.
    Label,
    /// Per-voxel foreground probability in [0, 1].
    Probability,
}

impl VolumeKind {
    pub fn name(self) -> &'static str {
        match self {
            VolumeKind::Intensity => "intensity",
            VolumeKind::Label => "label",
            VolumeKind::Probability => "probability",
        }
    }

    fn check(self, data: &[f64]) -> Result<()> {
        let bad = match self {
            VolumeKind::Intensity => data.iter().position(|v| !v.is_finite()),
            VolumeKind::Label => data.iter().position(|&v| v != 0.0 && v != 1.0),
            VolumeKind::Probability => data.iter().position(|&v| !(0.0..=1.0).contains(&v)),
        };
        match bad {
            Some(index) => Err(Error::InvalidValue {
                kind: self.name(),
                index,
                value: data[index],
            }),
            None => Ok(()),
        }
    }
}

/// A 3D scalar grid with physical spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    spacing: Spacing,
    kind: VolumeKind,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(dims: Dims, spacing: Spacing, kind: VolumeKind, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::DataLength {
                dims: dims.as_array(),
                expected: dims.len(),
                actual: data.len(),
            });
        }
        kind.check(&data)?;
        Ok(Self {
            dims,
            spacing,
            kind,
            data,
        })
    }

    pub fn filled(dims: Dims, spacing: Spacing, kind: VolumeKind, value: f64) -> Result<Self> {
        Self::new(dims, spacing, kind, vec![value; dims.len()])
    }

    /// Builds a volume by evaluating `f(z, y, x)` at every voxel.
    pub fn from_fn(
        dims: Dims,
        spacing: Spacing,
        kind: VolumeKind,
        mut f: impl FnMut([usize; 3]) -> f64,
    ) -> Result<Self> {
        let data = (0..dims.len()).map(|i| f(dims.coords(i))).collect();
        Self::new(dims, spacing, kind, data)
    }

    /// Label volume from a boolean mask.
    pub fn from_mask(dims: Dims, spacing: Spacing, mask: &[bool]) -> Result<Self> {
        let data = mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Self::new(dims, spacing, VolumeKind::Label, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, z: usize, y: usize, x: usize) -> f64 {
        self.data[self.dims.index(z, y, x)]
    }

    /// Reinterprets the volume as another kind, validating its values.
    pub fn with_kind(self, kind: VolumeKind) -> Result<Self> {
        kind.check(&self.data)?;
        Ok(Self { kind, ..self })
    }

    pub fn with_spacing(self, spacing: Spacing) -> Self {
        Self { spacing, ..self }
    }

    /// Replaces the voxel values, keeping dims and spacing.
    pub fn map_data(&self, kind: VolumeKind, data: Vec<f64>) -> Result<Self> {
        Self::new(self.dims, self.spacing, kind, data)
    }

    pub fn require_kind(&self, kind: VolumeKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: kind.name(),
                actual: self.kind.name(),
            })
        }
    }

    pub fn require_same_dims(&self, other: &Volume) -> Result<()> {
        if self.dims == other.dims {
            Ok(())
        } else {
            Err(Error::DimMismatch {
                left: self.dims.as_array(),
                right: other.dims.as_array(),
            })
        }
    }

    /// Foreground mask of a label volume.
    pub fn mask(&self) -> Vec<bool> {
        self.data.iter().map(|&v| v != 0.0).collect()
    }

    pub fn foreground_count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Voxel-grid provenance of a surface extracted from a mask. Lets distance
/// queries run on the grid instead of on free points.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub dims: Dims,
    pub spacing: Spacing,
    pub voxels: Vec<[usize; 3]>,
}

/// Boundary points of a mask in physical millimeter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePointSet {
    points: Vec<[f64; 3]>,
    grid: Option<SurfaceGrid>,
}

impl SurfacePointSet {
    /// Free point set. Points must be finite and pairwise distinct.
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "non-finite surface point {p:?}"
                )));
            }
            // +0.0 and -0.0 are the same location
            let key = p.map(|c| (c + 0.0).to_bits());
            if !seen.insert(key) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate surface point {p:?}"
                )));
            }
        }
        Ok(Self { points, grid: None })
    }

    pub fn from_grid(grid: SurfaceGrid) -> Self {
        let points = grid.voxels.iter().map(|&v| grid.spacing.to_mm(v)).collect();
        Self {
            points,
            grid: Some(grid),
        }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn grid(&self) -> Option<&SurfaceGrid> {
        self.grid.as_ref()
    }

    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Rigid translation; drops grid provenance.
    pub fn translated(&self, t: [f64; 3]) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]])
                .collect(),
            grid: None,
        }
    }
}

/// Binarizes a probability map: a voxel is foreground iff its value is `>= t`.
pub fn threshold_prob(v: &Volume, t: f64) -> Result<Volume> {
    v.require_kind(VolumeKind::Probability)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold {t} must lie in (0, 1)"
        )));
    }
    let data = v
        .data()
        .iter()
        .map(|&p| if p >= t { 1.0 } else { 0.0 })
        .collect();
    v.map_data(VolumeKind::Label, data)
}

/// Foreground voxels with at least one 6-connected neighbor that is
/// background or outside the grid.
pub fn extract_surface(m: &Volume) -> Result<SurfacePointSet> {
    m.require_kind(VolumeKind::Label)?;
    let dims = m.dims();
    let data = m.data();
    let voxels = (0..dims.len())
        .filter(|&i| data[i] != 0.0)
        .map(|i| dims.coords(i))
        .filter(|&c| {
            dims.on_border(c) || dims.neighbors6(c).any(|n| data[dims.index(n[0], n[1], n[2])] == 0.0)
        })
        .collect();
    Ok(SurfacePointSet::from_grid(SurfaceGrid {
        dims,
        spacing: m.spacing(),
        voxels,
    }))
}

/// Voxel-wise confusion counts of a prediction against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

pub fn confusion_counts(p: &Volume, r: &Volume) -> Result<Confusion> {
    p.require_kind(VolumeKind::Label)?;
    r.require_kind(VolumeKind::Label)?;
    p.require_same_dims(r)?;
    let mut c = Confusion::default();
    for (&pv, &rv) in p.data().iter().zip(r.data()) {
        match (pv != 0.0, rv != 0.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}
