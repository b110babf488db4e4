//! Cutoff far-field solver: sum only pairs within a fixed 3D distance.
//!
//! Pipeline per evaluation: migrate owned nodes into the spatial blocks,
//! halo remote points within the cutoff, build a uniform cell list (cell
//! edge = cutoff, 27-cell scan), accumulate pair contributions per owned
//! point in global node order, then migrate the velocities back to the 2D
//! mesh decomposition.

use super::spatial::{migrate_back, migrate_to_spatial, spatial_halo, MigratedPoint, SpatialMesh};
use super::{kernel, BrKernelParams, PREFACTOR};
use crate::mesh::{vorticity_weights, Stencils, SurfaceField};
use crate::transport::Comm;
use ndarray::Array2;
use std::collections::HashMap;

struct CellGrid {
    origin: [f64; 3],
    edge: f64,
    cells: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl CellGrid {
    fn build(points: &[MigratedPoint], edge: f64) -> Self {
        assert!(edge > 0.0, "cell edge must be positive");
        let mut origin = [f64::INFINITY; 3];
        for p in points {
            for d in 0..3 {
                origin[d] = origin[d].min(p.pos[d]);
            }
        }
        if points.is_empty() {
            origin = [0.0; 3];
        }
        let mut cells: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (idx, p) in points.iter().enumerate() {
            cells.entry(Self::key(origin, edge, p.pos)).or_default().push(idx as u32);
        }
        Self { origin, edge, cells }
    }

    fn key(origin: [f64; 3], edge: f64, pos: [f64; 3]) -> (i64, i64, i64) {
        (
            ((pos[0] - origin[0]) / edge).floor() as i64,
            ((pos[1] - origin[1]) / edge).floor() as i64,
            ((pos[2] - origin[2]) / edge).floor() as i64,
        )
    }

    /// Indices of all points in the 27 cells around `pos`.
    fn candidates_into(&self, pos: [f64; 3], out: &mut Vec<u32>) {
        out.clear();
        let (cx, cy, cz) = Self::key(self.origin, self.edge, pos);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend_from_slice(ids);
                    }
                }
            }
        }
    }
}

/// Velocities of `owned` points from all pairs within `cutoff` among
/// `cloud` (owned plus ghosts). Contributions accumulate in ascending
/// global node order, so the result is decomposition-independent.
fn accumulate(
    owned: &[MigratedPoint],
    cloud: &[MigratedPoint],
    params: &BrKernelParams,
    cutoff: f64,
    ny: usize,
) -> Vec<[f64; 3]> {
    let cells = CellGrid::build(cloud, cutoff);
    let weight = params.du * params.dv;
    let cutoff2 = cutoff * cutoff;
    let mut scratch: Vec<u32> = Vec::new();
    let mut neighbors: Vec<(u64, u32)> = Vec::new();

    owned
        .iter()
        .map(|target| {
            cells.candidates_into(target.pos, &mut scratch);
            neighbors.clear();
            for &idx in &scratch {
                let p = &cloud[idx as usize];
                let r = [
                    target.pos[0] - p.pos[0],
                    target.pos[1] - p.pos[1],
                    target.pos[2] - p.pos[2],
                ];
                if r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= cutoff2 {
                    neighbors.push((p.node_id(ny), idx));
                }
            }
            neighbors.sort_unstable_by_key(|(id, _)| *id);

            let mut acc = [0.0f64; 3];
            for &(_, idx) in &neighbors {
                let p = &cloud[idx as usize];
                let r = [
                    target.pos[0] - p.pos[0],
                    target.pos[1] - p.pos[1],
                    target.pos[2] - p.pos[2],
                ];
                let k = kernel(r, p.weight, params.epsilon);
                acc[0] += k[0];
                acc[1] += k[1];
                acc[2] += k[2];
            }
            [
                PREFACTOR * weight * acc[0],
                PREFACTOR * weight * acc[1],
                PREFACTOR * weight * acc[2],
            ]
        })
        .collect()
}

/// Neighbor pair set (by global node id) under a cutoff; diagnostic used to
/// check that smaller cutoffs select subsets of larger ones.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn neighbor_pairs(cloud: &[MigratedPoint], cutoff: f64, ny: usize) -> Vec<(u64, u64)> {
    let cells = CellGrid::build(cloud, cutoff);
    let cutoff2 = cutoff * cutoff;
    let mut scratch = Vec::new();
    let mut pairs = Vec::new();
    for target in cloud {
        cells.candidates_into(target.pos, &mut scratch);
        for &idx in &scratch {
            let p = &cloud[idx as usize];
            let r = [
                target.pos[0] - p.pos[0],
                target.pos[1] - p.pos[1],
                target.pos[2] - p.pos[2],
            ];
            if r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= cutoff2 {
                pairs.push((target.node_id(ny), p.node_id(ny)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Collect this rank's owned nodes as migration candidates.
pub fn surface_points(field: &SurfaceField, stencils: &Stencils, rank: u32) -> Vec<MigratedPoint> {
    let q = vorticity_weights(field, stencils);
    let owned = field.owned;
    owned
        .iter()
        .map(|(i, j)| {
            let (oi, oj) = (i - owned.i0, j - owned.j0);
            MigratedPoint {
                pos: field.position(i as i64, j as i64),
                weight: [q[0][[oi, oj]], q[1][[oi, oj]], q[2][[oi, oj]]],
                home_rank: rank,
                home_i: i as u32,
                home_j: j as u32,
            }
        })
        .collect()
}

/// Cutoff-limited far-field velocity in the original mesh layout.
/// Collective.
pub fn cutoff_br(
    field: &SurfaceField,
    stencils: &Stencils,
    params: &BrKernelParams,
    spatial: &SpatialMesh,
    cutoff: f64,
    comm: &mut Comm,
) -> [Array2<f64>; 3] {
    assert!(cutoff > 0.0, "cutoff must be positive");
    let ny = field.mesh.ny;
    let candidates = surface_points(field, stencils, comm.rank() as u32);

    let owned_pts = migrate_to_spatial(candidates, spatial, comm);
    let ghosts = spatial_halo(&owned_pts, spatial, cutoff, comm);
    let mut cloud = owned_pts;
    let owned_count = cloud.len();
    cloud.extend(ghosts);

    let velocities = accumulate(&cloud[..owned_count], &cloud, params, cutoff, ny);
    let results = cloud[..owned_count]
        .iter()
        .cloned()
        .zip(velocities)
        .collect();
    let home = migrate_back(results, comm);

    let owned = field.owned;
    let mut out: [Array2<f64>; 3] =
        std::array::from_fn(|_| Array2::zeros((owned.ni(), owned.nj())));
    for (i, j, w) in home {
        let (oi, oj) = (i as usize - owned.i0, j as usize - owned.j0);
        for c in 0..3 {
            out[c][[oi, oj]] = w[c];
        }
    }
    out
}
