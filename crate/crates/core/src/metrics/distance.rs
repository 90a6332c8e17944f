use crate::error::{Error, Result};
use crate::volume::SurfacePointSet;

use super::edt::squared_edt;
use super::kdtree::{squared_distance, KdTree};

/// How nearest-surface distances are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMethod {
    /// Distance transform on the shared voxel grid when both sets come from
    /// masks with the same dims and spacing, kd-tree queries otherwise.
    #[default]
    Accelerated,
    /// Exhaustive pairwise minimum. Reference path for verification.
    Exhaustive,
}

/// `d(p, s) = min ||p - s_i||` for every `p` in `q`, in millimeters.
pub fn point_to_set_distances(
    q: &SurfacePointSet,
    s: &SurfacePointSet,
    method: DistanceMethod,
) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric("distance to an empty surface"));
    }
    let squared = match method {
        DistanceMethod::Exhaustive => exhaustive(q, s),
        DistanceMethod::Accelerated => match on_shared_grid(q, s) {
            Some(d) => d,
            None => {
                let tree = KdTree::new(s.points());
                q.points().iter().map(|p| tree.nearest_squared(p)).collect()
            }
        },
    };
    Ok(squared.into_iter().map(f64::sqrt).collect())
}

fn exhaustive(q: &SurfacePointSet, s: &SurfacePointSet) -> Vec<f64> {
    q.points()
        .iter()
        .map(|p| {
            s.points()
                .iter()
                .map(|t| squared_distance(p, t))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Squared distances read off a distance transform of `s`, when both sets
/// live on the same voxel grid.
fn on_shared_grid(q: &SurfacePointSet, s: &SurfacePointSet) -> Option<Vec<f64>> {
    let (gq, gs) = (q.grid()?, s.grid()?);
    if gq.dims != gs.dims || gq.spacing != gs.spacing {
        return None;
    }
    let dims = gs.dims;
    let mut features = vec![false; dims.len()];
    for &[z, y, x] in &gs.voxels {
        features[dims.index(z, y, x)] = true;
    }
    let field = squared_edt(&features, dims, gs.spacing);
    Some(
        gq.voxels
            .iter()
            .map(|&[z, y, x]| field[dims.index(z, y, x)])
            .collect(),
    )
}
