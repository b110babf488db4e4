//! Stencil operators over the surface: central differences, surface
//! normals, and the compact 9-point Laplacian. All operators read only the
//! local window (owned + ghosts) and perform no communication.

use super::{Box2, Component, SurfaceField, HALO};
use ndarray::Array2;

/// Central u-derivative of a padded local array, evaluated on owned nodes.
pub fn diff_u(comp: &Array2<f64>, owned: Box2, du: f64) -> Array2<f64> {
    let h = HALO;
    let mut out = Array2::zeros((owned.ni(), owned.nj()));
    for oi in 0..owned.ni() {
        for oj in 0..owned.nj() {
            let (li, lj) = (oi + h, oj + h);
            out[[oi, oj]] = (comp[[li + 1, lj]] - comp[[li - 1, lj]]) / (2.0 * du);
        }
    }
    out
}

/// Central v-derivative of a padded local array, evaluated on owned nodes.
pub fn diff_v(comp: &Array2<f64>, owned: Box2, dv: f64) -> Array2<f64> {
    let h = HALO;
    let mut out = Array2::zeros((owned.ni(), owned.nj()));
    for oi in 0..owned.ni() {
        for oj in 0..owned.nj() {
            let (li, lj) = (oi + h, oj + h);
            out[[oi, oj]] = (comp[[li, lj + 1]] - comp[[li, lj - 1]]) / (2.0 * dv);
        }
    }
    out
}

/// Compact 9-point Laplacian: second differences along both axes plus the
/// mixed correction term, exact on quadratics.
pub fn laplacian9(comp: &Array2<f64>, owned: Box2, du: f64, dv: f64) -> Array2<f64> {
    let h = HALO;
    let du2 = du * du;
    let dv2 = dv * dv;
    let cross_coef = (du2 + dv2) / 12.0 / (du2 * dv2);
    let mut out = Array2::zeros((owned.ni(), owned.nj()));
    for oi in 0..owned.ni() {
        for oj in 0..owned.nj() {
            let (li, lj) = (oi + h, oj + h);
            let c = comp[[li, lj]];
            let e = comp[[li + 1, lj]];
            let w = comp[[li - 1, lj]];
            let n = comp[[li, lj + 1]];
            let s = comp[[li, lj - 1]];
            let ne = comp[[li + 1, lj + 1]];
            let nw = comp[[li - 1, lj + 1]];
            let se = comp[[li + 1, lj - 1]];
            let sw = comp[[li - 1, lj - 1]];
            let d2u = (e - 2.0 * c + w) / du2;
            let d2v = (n - 2.0 * c + s) / dv2;
            let cross = ne - 2.0 * e + se - 2.0 * n + 4.0 * c - 2.0 * s + nw - 2.0 * w + sw;
            out[[oi, oj]] = d2u + d2v + cross_coef * cross;
        }
    }
    out
}

/// Per-node derived quantities used by the interface models, all evaluated
/// over the owned block.
#[derive(Debug, Clone)]
pub struct Stencils {
    pub owned: Box2,
    /// u-derivative of position (x, y, z).
    pub d_u: [Array2<f64>; 3],
    /// v-derivative of position.
    pub d_v: [Array2<f64>; 3],
    /// Unnormalized surface normal D_u z x D_v z.
    pub normal: [Array2<f64>; 3],
    /// Laplacian of position.
    pub lap_pos: [Array2<f64>; 3],
    /// Laplacian of the two vorticity components.
    pub lap_w: [Array2<f64>; 2],
}

impl Stencils {
    #[inline]
    fn idx(&self, gi: usize, gj: usize) -> (usize, usize) {
        (gi - self.owned.i0, gj - self.owned.j0)
    }

    pub fn tangent_u(&self, gi: usize, gj: usize) -> [f64; 3] {
        let (a, b) = self.idx(gi, gj);
        [self.d_u[0][[a, b]], self.d_u[1][[a, b]], self.d_u[2][[a, b]]]
    }

    pub fn tangent_v(&self, gi: usize, gj: usize) -> [f64; 3] {
        let (a, b) = self.idx(gi, gj);
        [self.d_v[0][[a, b]], self.d_v[1][[a, b]], self.d_v[2][[a, b]]]
    }

    pub fn normal_at(&self, gi: usize, gj: usize) -> [f64; 3] {
        let (a, b) = self.idx(gi, gj);
        [
            self.normal[0][[a, b]],
            self.normal[1][[a, b]],
            self.normal[2][[a, b]],
        ]
    }

    /// Normal scaled to unit length; zero vector if degenerate.
    pub fn unit_normal_at(&self, gi: usize, gj: usize) -> [f64; 3] {
        let n = self.normal_at(gi, gj);
        let mag = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if mag == 0.0 {
            [0.0; 3]
        } else {
            [n[0] / mag, n[1] / mag, n[2] / mag]
        }
    }
}

/// Compute all stencil quantities for the owned block. Requires valid
/// ghosts; performs no communication.
pub fn surface_stencils(field: &SurfaceField) -> Stencils {
    let owned = field.owned;
    let du = field.mesh.du();
    let dv = field.mesh.dv();
    let pos = [Component::X, Component::Y, Component::Z];

    let d_u: [Array2<f64>; 3] = std::array::from_fn(|k| diff_u(field.comp(pos[k]), owned, du));
    let d_v: [Array2<f64>; 3] = std::array::from_fn(|k| diff_v(field.comp(pos[k]), owned, dv));
    let lap_pos: [Array2<f64>; 3] =
        std::array::from_fn(|k| laplacian9(field.comp(pos[k]), owned, du, dv));
    let lap_w = [
        laplacian9(field.comp(Component::W1), owned, du, dv),
        laplacian9(field.comp(Component::W2), owned, du, dv),
    ];

    let mut normal: [Array2<f64>; 3] =
        std::array::from_fn(|_| Array2::zeros((owned.ni(), owned.nj())));
    for oi in 0..owned.ni() {
        for oj in 0..owned.nj() {
            let tu = [d_u[0][[oi, oj]], d_u[1][[oi, oj]], d_u[2][[oi, oj]]];
            let tv = [d_v[0][[oi, oj]], d_v[1][[oi, oj]], d_v[2][[oi, oj]]];
            normal[0][[oi, oj]] = tu[1] * tv[2] - tu[2] * tv[1];
            normal[1][[oi, oj]] = tu[2] * tv[0] - tu[0] * tv[2];
            normal[2][[oi, oj]] = tu[0] * tv[1] - tu[1] * tv[0];
        }
    }

    Stencils {
        owned,
        d_u,
        d_v,
        normal,
        lap_pos,
        lap_w,
    }
}

/// The far-field kernel weight q = w1 * D_v z - w2 * D_u z per owned node.
pub fn vorticity_weights(field: &SurfaceField, st: &Stencils) -> [Array2<f64>; 3] {
    let owned = st.owned;
    let mut q: [Array2<f64>; 3] = std::array::from_fn(|_| Array2::zeros((owned.ni(), owned.nj())));
    for (gi, gj) in owned.iter() {
        let (oi, oj) = (gi - owned.i0, gj - owned.j0);
        let [w1, w2] = field.vorticity(gi as i64, gj as i64);
        for k in 0..3 {
            q[k][[oi, oj]] = w1 * st.d_v[k][[oi, oj]] - w2 * st.d_u[k][[oi, oj]];
        }
    }
    q
}
