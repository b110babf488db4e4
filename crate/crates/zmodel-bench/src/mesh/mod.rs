//! Distributed 2D surface mesh: block decomposition, node state, depth-2
//! halo exchange, boundary handling, and the stencil operators used by the
//! interface models.
//!
//! The mesh is a regular (nx, ny) grid of nodes over a rectangular
//! parameter domain (u, v). Each node carries a 3D position and two sheet
//! vorticity components. Ranks own disjoint index blocks; every local array
//! is padded with a two-node ghost frame on all sides.

mod boundary;
mod field;
mod halo;
mod stencil;

pub use boundary::{apply_boundary, extrapolate_free};
pub use field::{Component, FieldDeriv, SurfaceField, NCOMP};
pub use halo::exchange_ghosts;
pub use stencil::{diff_u, diff_v, surface_stencils, vorticity_weights, Stencils};

use crate::transport::Comm;
use serde::{Deserialize, Serialize};

/// Ghost frame depth on every side of an owned block.
pub const HALO: usize = 2;

/// Half-open index box `[i0, i1) x [j0, j1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Box2 {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl Box2 {
    pub fn ni(&self) -> usize {
        self.i1 - self.i0
    }

    pub fn nj(&self) -> usize {
        self.j1 - self.j0
    }

    pub fn count(&self) -> usize {
        self.ni() * self.nj()
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= self.i0 as i64 && i < self.i1 as i64 && j >= self.j0 as i64 && j < self.j1 as i64
    }

    /// Iterate owned `(i, j)` pairs, i outer.
    pub fn iter(self) -> impl Iterator<Item = (usize, usize)> {
        let (j0, j1) = (self.j0, self.j1);
        (self.i0..self.i1).flat_map(move |i| (j0..j1).map(move |j| (i, j)))
    }
}

/// Split `n` indices into `parts` contiguous blocks whose sizes differ by at
/// most one, larger blocks first.
pub fn split_balanced(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    assert!(parts >= 1 && parts <= n, "cannot split {n} into {parts} blocks");
    let base = n / parts;
    let rem = n % parts;
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for p in 0..parts {
        let len = base + usize::from(p < rem);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Boundary condition applied at the edges of the global mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcType {
    Periodic,
    Free,
}

/// Global descriptor of the distributed surface mesh. Cheap to clone; every
/// rank holds an identical copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub nx: usize,
    pub ny: usize,
    pub u0: f64,
    pub u1: f64,
    pub v0: f64,
    pub v1: f64,
    /// Rank grid (px, py); rank = pi * py + pj.
    pub grid: (usize, usize),
    pub bc: BcType,
}

impl SurfaceMesh {
    pub fn new(
        nx: usize,
        ny: usize,
        (u0, u1): (f64, f64),
        (v0, v1): (f64, f64),
        grid: (usize, usize),
        bc: BcType,
    ) -> Result<Self, String> {
        let (px, py) = grid;
        if px == 0 || py == 0 {
            return Err(format!("rank grid {grid:?} has a zero dimension"));
        }
        if px > nx || py > ny {
            return Err(format!("rank grid {grid:?} larger than mesh {nx}x{ny}"));
        }
        if nx / px < HALO || ny / py < HALO {
            return Err(format!(
                "rank grid {grid:?} leaves blocks narrower than the ghost depth {HALO}"
            ));
        }
        if !(u1 > u0 && v1 > v0) {
            return Err(format!("degenerate parameter domain [{u0},{u1}]x[{v0},{v1}]"));
        }
        Ok(Self {
            nx,
            ny,
            u0,
            u1,
            v0,
            v1,
            grid,
            bc,
        })
    }

    pub fn rank_count(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    pub fn rank_at(&self, pi: usize, pj: usize) -> usize {
        pi * self.grid.1 + pj
    }

    pub fn coords_of(&self, rank: usize) -> (usize, usize) {
        (rank / self.grid.1, rank % self.grid.1)
    }

    /// Node spacing along u. Periodic meshes do not duplicate the seam node,
    /// free meshes place their end nodes on the boundary.
    pub fn du(&self) -> f64 {
        match self.bc {
            BcType::Periodic => (self.u1 - self.u0) / self.nx as f64,
            BcType::Free => (self.u1 - self.u0) / (self.nx - 1) as f64,
        }
    }

    pub fn dv(&self) -> f64 {
        match self.bc {
            BcType::Periodic => (self.v1 - self.v0) / self.ny as f64,
            BcType::Free => (self.v1 - self.v0) / (self.ny - 1) as f64,
        }
    }

    pub fn u_of(&self, i: usize) -> f64 {
        self.u0 + i as f64 * self.du()
    }

    pub fn v_of(&self, j: usize) -> f64 {
        self.v0 + j as f64 * self.dv()
    }

    /// Domain extents, used for periodic coordinate correction.
    pub fn extent_u(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn extent_v(&self) -> f64 {
        self.v1 - self.v0
    }

    /// Owned index box of a rank: block (pi, pj) of the balanced 2D split.
    pub fn owned_box(&self, rank: usize) -> Box2 {
        let (pi, pj) = self.coords_of(rank);
        let ri = split_balanced(self.nx, self.grid.0)[pi].clone();
        let rj = split_balanced(self.ny, self.grid.1)[pj].clone();
        Box2 {
            i0: ri.start,
            i1: ri.end,
            j0: rj.start,
            j1: rj.end,
        }
    }

    /// All owned boxes, in rank order.
    pub fn boxes(&self) -> Vec<Box2> {
        (0..self.rank_count()).map(|r| self.owned_box(r)).collect()
    }

    /// Neighbor rank in grid direction (di, dj), if any. Periodic meshes
    /// wrap; free meshes have no neighbor past the global edge.
    pub fn neighbor(&self, rank: usize, di: i64, dj: i64) -> Option<usize> {
        let (px, py) = (self.grid.0 as i64, self.grid.1 as i64);
        let (pi, pj) = self.coords_of(rank);
        let (ni, nj) = (pi as i64 + di, pj as i64 + dj);
        match self.bc {
            BcType::Periodic => {
                Some(self.rank_at(ni.rem_euclid(px) as usize, nj.rem_euclid(py) as usize))
            }
            BcType::Free => {
                if (0..px).contains(&ni) && (0..py).contains(&nj) {
                    Some(self.rank_at(ni as usize, nj as usize))
                } else {
                    None
                }
            }
        }
    }
}

/// Halo exchange followed by boundary finalization; the pair keeps every
/// ghost node consistent with its owner and geometrically contiguous.
pub fn refresh_ghosts(field: &mut SurfaceField, comm: &mut Comm) {
    field.halo_exchange(comm);
    apply_boundary(field);
}
