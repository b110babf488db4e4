//! Far-field interface velocity from the regularized Birkhoff-Rott sum.
//!
//! The velocity at node i is
//!
//! ```text
//! W(i) = -1/(4*pi) * sum_j  q_j x (z_i - z_j) / (|z_i - z_j|^2 + eps^2)^(3/2) * du * dv
//! ```
//!
//! with kernel weight q_j = w1(j) * D_v z(j) - w2(j) * D_u z(j). Two solvers
//! compute it: [`exact_br`] circulates node blocks around the rank ring and
//! sums every pair; [`cutoff::cutoff_br`] migrates nodes into a spatial
//! decomposition and sums only pairs within a cutoff distance.
//!
//! Both accumulate contributions in global node order, so results are
//! independent of the rank decomposition down to the last bit.

pub mod cutoff;
pub mod spatial;

pub use cutoff::cutoff_br;
pub use spatial::{migrate_to_spatial, spatial_halo, MigratedPoint, SpatialMesh};

use crate::mesh::{vorticity_weights, Box2, Stencils, SurfaceField, SurfaceMesh};
use crate::transport::{Comm, RingDirection};
use crate::util::wire::{Reader, Writer};
use ndarray::Array2;

/// Kernel parameters: desingularization length and parameter-space weights.
#[derive(Debug, Clone, Copy)]
pub struct BrKernelParams {
    pub epsilon: f64,
    pub du: f64,
    pub dv: f64,
}

impl BrKernelParams {
    pub fn for_mesh(mesh: &SurfaceMesh, epsilon: f64) -> Self {
        assert!(epsilon > 0.0, "desingularization must be positive");
        Self {
            epsilon,
            du: mesh.du(),
            dv: mesh.dv(),
        }
    }

    /// Grid-proportional default desingularization: a quarter of the mean
    /// node spacing along u.
    pub fn default_epsilon(mesh: &SurfaceMesh) -> f64 {
        0.25 * mesh.extent_u() / mesh.nx as f64
    }
}

/// Constant in front of the pair sum.
pub const PREFACTOR: f64 = -1.0 / (4.0 * std::f64::consts::PI);

/// Regularized pair kernel: q x r / (|r|^2 + eps^2)^(3/2). The prefactor
/// and du*dv quadrature weight are applied by the caller.
#[inline]
pub fn kernel(r: [f64; 3], q: [f64; 3], epsilon: f64) -> [f64; 3] {
    let cross = [
        q[1] * r[2] - q[2] * r[1],
        q[2] * r[0] - q[0] * r[2],
        q[0] * r[1] - q[1] * r[0],
    ];
    let d = r[0] * r[0] + r[1] * r[1] + r[2] * r[2] + epsilon * epsilon;
    if d == 0.0 {
        // Unregularized self-interaction: the numerator vanishes first.
        return [0.0; 3];
    }
    let inv = 1.0 / (d * d.sqrt());
    [cross[0] * inv, cross[1] * inv, cross[2] * inv]
}

/// One rank's share of the circulating node data: positions and kernel
/// weights for an owned box.
struct NodeBlock {
    bounds: Box2,
    /// x, y, z, q1, q2, q3 per node, row-major.
    data: Vec<f64>,
}

const BLOCK_FIELDS: usize = 6;

impl NodeBlock {
    fn from_field(field: &SurfaceField, q: &[Array2<f64>; 3]) -> Self {
        let bounds = field.owned;
        let mut data = Vec::with_capacity(bounds.count() * BLOCK_FIELDS);
        for (i, j) in bounds.iter() {
            let p = field.position(i as i64, j as i64);
            let (oi, oj) = (i - bounds.i0, j - bounds.j0);
            data.extend_from_slice(&[
                p[0],
                p[1],
                p[2],
                q[0][[oi, oj]],
                q[1][[oi, oj]],
                q[2][[oi, oj]],
            ]);
        }
        Self { bounds, data }
    }

    fn to_wire(&self) -> Vec<u8> {
        let mut w = Writer::with_capacity(16 + self.data.len() * 8);
        w.put_u32(self.bounds.i0 as u32);
        w.put_u32(self.bounds.i1 as u32);
        w.put_u32(self.bounds.j0 as u32);
        w.put_u32(self.bounds.j1 as u32);
        w.put_f64_slice(&self.data);
        w.finish()
    }

    fn from_wire(payload: &[u8]) -> Self {
        let mut r = Reader::new(payload);
        let bounds = Box2 {
            i0: r.u32() as usize,
            i1: r.u32() as usize,
            j0: r.u32() as usize,
            j1: r.u32() as usize,
        };
        let mut data = Vec::with_capacity(bounds.count() * BLOCK_FIELDS);
        for _ in 0..bounds.count() * BLOCK_FIELDS {
            data.push(r.f64());
        }
        Self { bounds, data }
    }
}

/// Positions and weights of every node on the global mesh, assembled in
/// row-major node order.
struct GlobalNodes {
    ny: usize,
    /// Six parallel arrays indexed by flat node id i*ny + j.
    fields: [Vec<f64>; BLOCK_FIELDS],
}

impl GlobalNodes {
    fn new(nx: usize, ny: usize) -> Self {
        Self {
            ny,
            fields: std::array::from_fn(|_| vec![0.0; nx * ny]),
        }
    }

    fn install(&mut self, block: &NodeBlock) {
        let mut src = 0;
        for (i, j) in block.bounds.iter() {
            let id = i * self.ny + j;
            for f in 0..BLOCK_FIELDS {
                self.fields[f][id] = block.data[src * BLOCK_FIELDS + f];
            }
            src += 1;
        }
    }
}

/// Brute-force all-pairs velocity: circulate node blocks with R-1 ring
/// shifts, then sum every pair in global node order. Collective.
pub fn exact_br(
    field: &SurfaceField,
    stencils: &Stencils,
    params: &BrKernelParams,
    comm: &mut Comm,
) -> [Array2<f64>; 3] {
    let mesh = &field.mesh;
    let q = vorticity_weights(field, stencils);
    let own = NodeBlock::from_field(field, &q);

    let mut global = GlobalNodes::new(mesh.nx, mesh.ny);
    global.install(&own);
    let mut travelling = own.to_wire();
    for _ in 1..comm.size() {
        travelling = comm.ring_shift(travelling, RingDirection::Forward);
        global.install(&NodeBlock::from_wire(&travelling));
    }

    let owned = field.owned;
    let total = mesh.nx * mesh.ny;
    let weight = params.du * params.dv;
    let eps = params.epsilon;
    let [xs, ys, zs, q1, q2, q3] = &global.fields;

    let mut out: [Array2<f64>; 3] =
        std::array::from_fn(|_| Array2::zeros((owned.ni(), owned.nj())));
    for (i, j) in owned.iter() {
        let p = field.position(i as i64, j as i64);
        let mut acc = [0.0f64; 3];
        for id in 0..total {
            let r = [p[0] - xs[id], p[1] - ys[id], p[2] - zs[id]];
            let k = kernel(r, [q1[id], q2[id], q3[id]], eps);
            acc[0] += k[0];
            acc[1] += k[1];
            acc[2] += k[2];
        }
        let (oi, oj) = (i - owned.i0, j - owned.j0);
        for (c, out_c) in out.iter_mut().enumerate() {
            out_c[[oi, oj]] = PREFACTOR * weight * acc[c];
        }
    }
    out
}
