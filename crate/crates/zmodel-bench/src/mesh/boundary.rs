//! Boundary finalization of ghost nodes after a halo exchange.
//!
//! Periodic meshes: ghosts sourced across the global seam get the domain
//! extent added to or subtracted from their position coordinate, so that
//! stencils see a geometrically contiguous sheet. Only positions are
//! corrected, never vorticity. Free meshes: ghosts past the global edge are
//! filled by linear extrapolation from the two nearest interior nodes, for
//! all components.

use super::{BcType, Box2, Component, SurfaceField, SurfaceMesh, HALO};
use ndarray::Array2;

/// Finalize ghost nodes; must run after `halo_exchange` (the periodic
/// correction offsets freshly copied ghosts exactly once).
pub fn apply_boundary(field: &mut SurfaceField) {
    match field.mesh.bc {
        BcType::Periodic => periodic_offsets(field),
        BcType::Free => {
            let mesh = field.mesh.clone();
            let rank = field.rank;
            extrapolate_free(&mesh, mesh.owned_box(rank), field.comps_mut());
        }
    }
}

fn periodic_offsets(field: &mut SurfaceField) {
    let owned = field.owned;
    let (nx, ny) = (field.mesh.nx as i64, field.mesh.ny as i64);
    let (lu, lv) = (field.mesh.extent_u(), field.mesh.extent_v());
    let h = HALO as i64;

    for gi in owned.i0 as i64 - h..owned.i1 as i64 + h {
        for gj in owned.j0 as i64 - h..owned.j1 as i64 + h {
            if owned.contains(gi, gj) {
                continue;
            }
            if gi < 0 {
                let v = field.get(Component::X, gi, gj) - lu;
                field.set(Component::X, gi, gj, v);
            } else if gi >= nx {
                let v = field.get(Component::X, gi, gj) + lu;
                field.set(Component::X, gi, gj, v);
            }
            if gj < 0 {
                let v = field.get(Component::Y, gi, gj) - lv;
                field.set(Component::Y, gi, gj, v);
            } else if gj >= ny {
                let v = field.get(Component::Y, gi, gj) + lv;
                field.set(Component::Y, gi, gj, v);
            }
        }
    }
}

/// Linearly extrapolate out-of-domain ghost cells at the global edges.
/// Usable for the node state and for any haloed scalar with the same local
/// window shape.
pub fn extrapolate_free(mesh: &SurfaceMesh, owned: Box2, comps: &mut [Array2<f64>]) {
    let h = HALO;
    let (ni, nj) = (owned.ni(), owned.nj());
    let li_max = ni + 2 * h;
    let lj_max = nj + 2 * h;

    for comp in comps.iter_mut() {
        // u direction first: fill columns past the global edge for every
        // local row (rows past the edge are overwritten by the v pass).
        if owned.i0 == 0 {
            for lj in 0..lj_max {
                let first = comp[[h, lj]];
                let second = comp[[h + 1, lj]];
                comp[[h - 1, lj]] = 2.0 * first - second;
                comp[[h - 2, lj]] = 2.0 * comp[[h - 1, lj]] - first;
            }
        }
        if owned.i1 == mesh.nx {
            for lj in 0..lj_max {
                let last = comp[[h + ni - 1, lj]];
                let prev = comp[[h + ni - 2, lj]];
                comp[[h + ni, lj]] = 2.0 * last - prev;
                comp[[h + ni + 1, lj]] = 2.0 * comp[[h + ni, lj]] - last;
            }
        }
        if owned.j0 == 0 {
            for li in 0..li_max {
                let first = comp[[li, h]];
                let second = comp[[li, h + 1]];
                comp[[li, h - 1]] = 2.0 * first - second;
                comp[[li, h - 2]] = 2.0 * comp[[li, h - 1]] - first;
            }
        }
        if owned.j1 == mesh.ny {
            for li in 0..li_max {
                let last = comp[[li, h + nj - 1]];
                let prev = comp[[li, h + nj - 2]];
                comp[[li, h + nj]] = 2.0 * last - prev;
                comp[[li, h + nj + 1]] = 2.0 * comp[[li, h + nj]] - last;
            }
        }
    }
}
