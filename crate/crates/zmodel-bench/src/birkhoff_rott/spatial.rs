//! Spatial redistribution of surface nodes for the cutoff solver.
//!
//! The 3D simulation box is decomposed into 2D x/y blocks spanning all z.
//! Surface nodes migrate to the rank whose block contains their current
//! position (pattern class `migrate`); each rank is then given ghost copies
//! of every remote point within the cutoff distance of its block (pattern
//! class `halo`, conservative block-expansion criterion).

use crate::transport::{Comm, Pattern};
use crate::util::wire::{Reader, Writer};

/// 3D box decomposed into equal-width x/y blocks spanning all z.
#[derive(Debug, Clone, Copy)]
pub struct SpatialMesh {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Block grid (px, py); block rank = pi * py + pj.
    pub grid: (usize, usize),
}

impl SpatialMesh {
    pub fn new(lo: [f64; 3], hi: [f64; 3], grid: (usize, usize)) -> Result<Self, String> {
        if grid.0 == 0 || grid.1 == 0 {
            return Err(format!("spatial grid {grid:?} has a zero dimension"));
        }
        for d in 0..3 {
            if !(hi[d] > lo[d]) {
                return Err(format!("degenerate spatial box: lo {lo:?} hi {hi:?}"));
            }
        }
        Ok(Self { lo, hi, grid })
    }

    fn slab(&self, axis: usize, parts: usize, index: usize) -> (f64, f64) {
        let width = (self.hi[axis] - self.lo[axis]) / parts as f64;
        (
            self.lo[axis] + index as f64 * width,
            self.lo[axis] + (index + 1) as f64 * width,
        )
    }

    /// x/y rectangle of a block.
    pub fn block_bounds(&self, rank: usize) -> ([f64; 2], [f64; 2]) {
        let (pi, pj) = (rank / self.grid.1, rank % self.grid.1);
        let (x0, x1) = self.slab(0, self.grid.0, pi);
        let (y0, y1) = self.slab(1, self.grid.1, pj);
        ([x0, y0], [x1, y1])
    }

    fn slab_index(&self, axis: usize, parts: usize, coord: f64) -> usize {
        let width = (self.hi[axis] - self.lo[axis]) / parts as f64;
        let raw = ((coord - self.lo[axis]) / width).floor();
        // Points outside the box clamp into the nearest boundary block.
        (raw.max(0.0) as usize).min(parts - 1)
    }

    /// Owning block of an x/y position; blocks are half-open [lo, hi) with
    /// out-of-box positions clamped to the nearest block.
    pub fn owner_of(&self, x: f64, y: f64) -> usize {
        let pi = self.slab_index(0, self.grid.0, x);
        let pj = self.slab_index(1, self.grid.1, y);
        pi * self.grid.1 + pj
    }

    /// Distance from an x/y position to a block rectangle (zero inside).
    pub fn distance_to_block(&self, rank: usize, x: f64, y: f64) -> f64 {
        let (lo, hi) = self.block_bounds(rank);
        let dx = (lo[0] - x).max(x - hi[0]).max(0.0);
        let dy = (lo[1] - y).max(y - hi[1]).max(0.0);
        (dx * dx + dy * dy).sqrt()
    }
}

/// A surface node relocated into the spatial decomposition. `home_*` pins
/// the node's original 2D mesh placement so results can migrate back.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MigratedPoint {
    pub pos: [f64; 3],
    /// Kernel weight q at the node.
    pub weight: [f64; 3],
    pub home_rank: u32,
    pub home_i: u32,
    pub home_j: u32,
}

impl MigratedPoint {
    /// Flat global node id; unique and decomposition-independent.
    pub fn node_id(&self, ny: usize) -> u64 {
        self.home_i as u64 * ny as u64 + self.home_j as u64
    }

    fn write(&self, w: &mut Writer) {
        for v in self.pos.iter().chain(self.weight.iter()) {
            w.put_f64(*v);
        }
        w.put_u32(self.home_rank);
        w.put_u32(self.home_i);
        w.put_u32(self.home_j);
    }

    fn read(r: &mut Reader) -> Self {
        let mut pos = [0.0; 3];
        let mut weight = [0.0; 3];
        for v in pos.iter_mut() {
            *v = r.f64();
        }
        for v in weight.iter_mut() {
            *v = r.f64();
        }
        Self {
            pos,
            weight,
            home_rank: r.u32(),
            home_i: r.u32(),
            home_j: r.u32(),
        }
    }
}

fn pack_points(points: &[MigratedPoint]) -> Vec<u8> {
    let mut w = Writer::with_capacity(points.len() * 60);
    for p in points {
        p.write(&mut w);
    }
    w.finish()
}

fn unpack_points(payload: &[u8], into: &mut Vec<MigratedPoint>) {
    let mut r = Reader::new(payload);
    while !r.is_empty() {
        into.push(MigratedPoint::read(&mut r));
    }
}

/// Deliver every candidate point to the spatial block owning its position.
/// Returns this rank's owned points, ordered by source rank then by the
/// sender's packing order. Collective; pattern class `migrate`.
pub fn migrate_to_spatial(
    candidates: Vec<MigratedPoint>,
    spatial: &SpatialMesh,
    comm: &mut Comm,
) -> Vec<MigratedPoint> {
    let ranks = comm.size();
    assert_eq!(
        spatial.grid.0 * spatial.grid.1,
        ranks,
        "spatial grid does not match the rank count"
    );
    let mut buckets: Vec<Vec<MigratedPoint>> = (0..ranks).map(|_| Vec::new()).collect();
    for p in candidates {
        for (d, v) in p.pos.iter().enumerate() {
            assert!(
                v.is_finite(),
                "migrate_to_spatial: non-finite position component {d} at node ({}, {}) from rank {}",
                p.home_i,
                p.home_j,
                p.home_rank
            );
        }
        buckets[spatial.owner_of(p.pos[0], p.pos[1])].push(p);
    }

    let sends: Vec<(usize, Vec<u8>)> = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(dest, pts)| (dest, pack_points(&pts)))
        .collect();

    let mut owned = Vec::new();
    for (_, payload) in comm.exchange(sends, Pattern::Migrate) {
        unpack_points(&payload, &mut owned);
    }
    owned
}

/// Give every rank ghost copies of remote points within `cutoff` of its
/// block. Conservative: membership is tested against the block rectangle
/// expanded by the cutoff, which can only over-deliver, never miss a pair.
/// Collective; pattern class `halo`.
pub fn spatial_halo(
    owned: &[MigratedPoint],
    spatial: &SpatialMesh,
    cutoff: f64,
    comm: &mut Comm,
) -> Vec<MigratedPoint> {
    let ranks = comm.size();
    let me = comm.rank();
    let mut buckets: Vec<Vec<MigratedPoint>> = (0..ranks).map(|_| Vec::new()).collect();
    for p in owned {
        for (t, bucket) in buckets.iter_mut().enumerate() {
            if t != me && spatial.distance_to_block(t, p.pos[0], p.pos[1]) <= cutoff {
                bucket.push(*p);
            }
        }
    }

    let sends: Vec<(usize, Vec<u8>)> = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, pts)| !pts.is_empty())
        .map(|(dest, pts)| (dest, pack_points(&pts)))
        .collect();

    let mut ghosts = Vec::new();
    for (_, payload) in comm.exchange(sends, Pattern::Halo) {
        unpack_points(&payload, &mut ghosts);
    }
    ghosts
}

/// Return computed velocities to the home ranks of their nodes. Collective;
/// pattern class `migrate`. Output is (home_i, home_j, velocity) triples.
pub fn migrate_back(
    results: Vec<(MigratedPoint, [f64; 3])>,
    comm: &mut Comm,
) -> Vec<(u32, u32, [f64; 3])> {
    let ranks = comm.size();
    let mut buckets: Vec<Writer> = (0..ranks).map(|_| Writer::new()).collect();
    for (p, w) in results {
        let b = &mut buckets[p.home_rank as usize];
        b.put_u32(p.home_i);
        b.put_u32(p.home_j);
        for v in w {
            b.put_f64(v);
        }
    }

    let sends: Vec<(usize, Vec<u8>)> = buckets
        .into_iter()
        .enumerate()
        .filter(|(_, w)| !w.is_empty())
        .map(|(dest, w)| (dest, w.finish()))
        .collect();

    let mut home = Vec::new();
    for (_, payload) in comm.exchange(sends, Pattern::Migrate) {
        let mut r = Reader::new(&payload);
        while !r.is_empty() {
            let i = r.u32();
            let j = r.u32();
            home.push((i, j, [r.f64(), r.f64(), r.f64()]));
        }
    }
    home
}
