//! Depth-2 ghost exchange over the 8-neighbor stencil (edges + corners).
//!
//! Works on any set of component arrays shaped like a rank's local window,
//! so the same path serves the full node state and single derived scalars.
//! Ghost values are verbatim copies of the owner's values; coordinate
//! corrections for periodic wrap are a separate pass (`apply_boundary`).

use super::{Box2, SurfaceMesh, HALO};
use crate::transport::{Comm, Pattern};
use crate::util::wire::{Reader, Writer};
use ndarray::Array2;

/// The 8 neighbor directions (di, dj), fixed order.
const DIRECTIONS: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Owned strip sent toward direction `d`: the cells a neighbor on that side
/// needs for its ghost frame.
fn send_strip(owned: &Box2, (di, dj): (i64, i64)) -> Box2 {
    let (i0, i1) = match di {
        -1 => (owned.i0, owned.i0 + HALO),
        1 => (owned.i1 - HALO, owned.i1),
        _ => (owned.i0, owned.i1),
    };
    let (j0, j1) = match dj {
        -1 => (owned.j0, owned.j0 + HALO),
        1 => (owned.j1 - HALO, owned.j1),
        _ => (owned.j0, owned.j1),
    };
    Box2 { i0, i1, j0, j1 }
}

/// This rank's ghost strip on side `d`, as signed global index ranges.
fn ghost_strip(owned: &Box2, (di, dj): (i64, i64)) -> (i64, i64, i64, i64) {
    let h = HALO as i64;
    let (i0, i1) = match di {
        -1 => (owned.i0 as i64 - h, owned.i0 as i64),
        1 => (owned.i1 as i64, owned.i1 as i64 + h),
        _ => (owned.i0 as i64, owned.i1 as i64),
    };
    let (j0, j1) = match dj {
        -1 => (owned.j0 as i64 - h, owned.j0 as i64),
        1 => (owned.j1 as i64, owned.j1 as i64 + h),
        _ => (owned.j0 as i64, owned.j1 as i64),
    };
    (i0, i1, j0, j1)
}

fn dir_code(d: (i64, i64)) -> u32 {
    DIRECTIONS.iter().position(|&x| x == d).unwrap() as u32
}

/// Fill the ghost frame of `comps` from neighboring ranks. Collective.
pub fn exchange_ghosts(mesh: &SurfaceMesh, rank: usize, comps: &mut [Array2<f64>], comm: &mut Comm) {
    let owned = mesh.owned_box(rank);
    let h = HALO as i64;

    let mut sends: Vec<(usize, Vec<u8>)> = Vec::with_capacity(8);
    for d in DIRECTIONS {
        let Some(neighbor) = mesh.neighbor(rank, d.0, d.1) else {
            continue;
        };
        let strip = send_strip(&owned, d);
        // Tag with the side the receiver must fill: the opposite direction.
        let recv_side = (-d.0, -d.1);
        let mut w = Writer::with_capacity(8 + strip.count() * comps.len() * 8);
        w.put_u32(dir_code(recv_side));
        w.put_u32(comps.len() as u32);
        for comp in comps.iter() {
            for i in strip.i0..strip.i1 {
                for j in strip.j0..strip.j1 {
                    let li = (i - owned.i0 + HALO, j - owned.j0 + HALO);
                    w.put_f64(comp[[li.0, li.1]]);
                }
            }
        }
        sends.push((neighbor, w.finish()));
    }

    let received = comm.exchange(sends, Pattern::Halo);

    for (_, payload) in received {
        let mut r = Reader::new(&payload);
        let side = DIRECTIONS[r.u32() as usize];
        let ncomp = r.u32() as usize;
        debug_assert_eq!(ncomp, comps.len());
        let (gi0, gi1, gj0, gj1) = ghost_strip(&owned, side);
        for comp in comps.iter_mut() {
            for gi in gi0..gi1 {
                for gj in gj0..gj1 {
                    let li = (gi - owned.i0 as i64 + h) as usize;
                    let lj = (gj - owned.j0 as i64 + h) as usize;
                    comp[[li, lj]] = r.f64();
                }
            }
        }
        debug_assert!(r.is_empty());
    }
}
