//! Node state storage: structure-of-arrays position and vorticity with a
//! ghost frame, plus the derivative container used by time integration.

use super::{Box2, SurfaceMesh, HALO};
use ndarray::Array2;

/// Number of state components per node.
pub const NCOMP: usize = 5;

/// The five per-node state components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X,
    Y,
    Z,
    W1,
    W2,
}

impl Component {
    pub const ALL: [Component; NCOMP] =
        [Component::X, Component::Y, Component::Z, Component::W1, Component::W2];

    pub fn index(self) -> usize {
        match self {
            Component::X => 0,
            Component::Y => 1,
            Component::Z => 2,
            Component::W1 => 3,
            Component::W2 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::X => "x",
            Component::Y => "y",
            Component::Z => "z",
            Component::W1 => "w1",
            Component::W2 => "w2",
        }
    }
}

/// Per-rank node state over the owned block plus ghost frame.
///
/// Local storage is indexed `[gi - i0 + HALO, gj - j0 + HALO]`; accessors
/// take global indices (signed, so ghosts past the global edge are
/// addressable as -1, -2, nx, nx+1).
#[derive(Debug, Clone)]
pub struct SurfaceField {
    pub mesh: SurfaceMesh,
    pub rank: usize,
    pub owned: Box2,
    comps: [Array2<f64>; NCOMP],
}

impl SurfaceField {
    /// Zero-initialized state for `rank`'s block of `mesh`.
    pub fn new(mesh: SurfaceMesh, rank: usize) -> Self {
        let owned = mesh.owned_box(rank);
        let shape = (owned.ni() + 2 * HALO, owned.nj() + 2 * HALO);
        Self {
            mesh,
            rank,
            owned,
            comps: std::array::from_fn(|_| Array2::zeros(shape)),
        }
    }

    #[inline]
    pub fn local(&self, gi: i64, gj: i64) -> (usize, usize) {
        let li = gi - self.owned.i0 as i64 + HALO as i64;
        let lj = gj - self.owned.j0 as i64 + HALO as i64;
        debug_assert!(li >= 0 && lj >= 0, "index ({gi},{gj}) outside local window");
        (li as usize, lj as usize)
    }

    #[inline]
    pub fn get(&self, c: Component, gi: i64, gj: i64) -> f64 {
        let (li, lj) = self.local(gi, gj);
        self.comps[c.index()][[li, lj]]
    }

    #[inline]
    pub fn set(&mut self, c: Component, gi: i64, gj: i64, v: f64) {
        let (li, lj) = self.local(gi, gj);
        self.comps[c.index()][[li, lj]] = v;
    }

    pub fn comp(&self, c: Component) -> &Array2<f64> {
        &self.comps[c.index()]
    }

    pub fn comp_mut(&mut self, c: Component) -> &mut Array2<f64> {
        &mut self.comps[c.index()]
    }

    pub fn comps_mut(&mut self) -> &mut [Array2<f64>; NCOMP] {
        &mut self.comps
    }

    pub fn position(&self, gi: i64, gj: i64) -> [f64; 3] {
        [
            self.get(Component::X, gi, gj),
            self.get(Component::Y, gi, gj),
            self.get(Component::Z, gi, gj),
        ]
    }

    pub fn vorticity(&self, gi: i64, gj: i64) -> [f64; 2] {
        [self.get(Component::W1, gi, gj), self.get(Component::W2, gi, gj)]
    }

    /// Exchange ghost frames with neighboring ranks (collective).
    pub fn halo_exchange(&mut self, comm: &mut crate::transport::Comm) {
        let mesh = self.mesh.clone();
        let rank = self.rank;
        super::halo::exchange_ghosts(&mesh, rank, &mut self.comps, comm);
    }

    /// self = a * self + b * other, owned nodes only. Ghosts are left stale
    /// and must be refreshed before the next stencil pass.
    pub fn blend(&mut self, a: f64, other: &SurfaceField, b: f64) {
        debug_assert_eq!(self.owned, other.owned);
        for c in 0..NCOMP {
            let dst = &mut self.comps[c];
            let src = &other.comps[c];
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                *d = a * *d + b * *s;
            }
        }
    }

    /// self += a * deriv, owned nodes only.
    pub fn axpy_deriv(&mut self, a: f64, deriv: &FieldDeriv) {
        debug_assert_eq!(self.owned, deriv.owned);
        for c in 0..NCOMP {
            for ((di, dj), dv) in deriv.comps[c].indexed_iter() {
                self.comps[c][[di + HALO, dj + HALO]] += a * dv;
            }
        }
    }

    /// First owned node holding a non-finite value, if any.
    pub fn find_non_finite(&self) -> Option<(Component, usize, usize)> {
        for c in Component::ALL {
            for (i, j) in self.owned.iter() {
                if !self.get(c, i as i64, j as i64).is_finite() {
                    return Some((c, i, j));
                }
            }
        }
        None
    }

    /// Largest |z| over owned nodes.
    pub fn max_abs_z(&self) -> f64 {
        self.owned
            .iter()
            .map(|(i, j)| self.get(Component::Z, i as i64, j as i64).abs())
            .fold(0.0, f64::max)
    }
}

/// Time derivative of the five state components over the owned block
/// (no ghost frame).
#[derive(Debug, Clone)]
pub struct FieldDeriv {
    pub owned: Box2,
    comps: [Array2<f64>; NCOMP],
}

impl FieldDeriv {
    pub fn zeros(owned: Box2) -> Self {
        let shape = (owned.ni(), owned.nj());
        Self {
            owned,
            comps: std::array::from_fn(|_| Array2::zeros(shape)),
        }
    }

    #[inline]
    pub fn get(&self, c: Component, gi: usize, gj: usize) -> f64 {
        self.comps[c.index()][[gi - self.owned.i0, gj - self.owned.j0]]
    }

    #[inline]
    pub fn set(&mut self, c: Component, gi: usize, gj: usize, v: f64) {
        self.comps[c.index()][[gi - self.owned.i0, gj - self.owned.j0]] = v;
    }

    pub fn comp(&self, c: Component) -> &Array2<f64> {
        &self.comps[c.index()]
    }

    pub fn comp_mut(&mut self, c: Component) -> &mut Array2<f64> {
        &mut self.comps[c.index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
