//! Distributed 2D complex FFT over the surface-mesh block decomposition.
//!
//! The transform runs as transpose / local-FFT stages. Three independent
//! knobs select genuinely different message schedules without changing the
//! mathematics:
//!
//! * `all_to_all` — true sends one message to every peer per transpose
//!   (dense full exchange, empty payloads included); false stages the same
//!   data as R-1 pairwise rounds carrying only non-empty chunks.
//! * `pencils` — true re-splits rows over all R ranks before the row
//!   transform (two global transposes); false gathers rows within each
//!   rank-grid row first (slab phase local to the grid row), then does the
//!   single global transpose to column slabs.
//! * `reorder` — true physically permutes received chunks into a contiguous
//!   canonical buffer before transforming; false runs the line transforms
//!   reading strided directly out of the receive chunks.
//!
//! Forward is unnormalized; the inverse divides by nx*ny so a roundtrip is
//! the identity. All traffic is traced under the `all_to_all` pattern
//! class.

mod local;

pub use local::fft_line;

use crate::mesh::{split_balanced, Box2, SurfaceMesh};
use crate::transport::{Comm, Pattern};
use crate::util::wire::{Reader, Writer};
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Communication strategy knobs for the distributed transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FftCommConfig {
    pub all_to_all: bool,
    pub pencils: bool,
    pub reorder: bool,
}

impl FftCommConfig {
    /// Configuration by table index 0..7: bit 2 = all_to_all, bit 1 =
    /// pencils, bit 0 = reorder.
    pub fn from_index(index: u8) -> Self {
        assert!(index < 8, "fft config index {index} out of range 0..8");
        Self {
            all_to_all: index & 4 != 0,
            pencils: index & 2 != 0,
            reorder: index & 1 != 0,
        }
    }

    pub fn index(&self) -> u8 {
        (self.all_to_all as u8) << 2 | (self.pencils as u8) << 1 | self.reorder as u8
    }

    pub fn all() -> [FftCommConfig; 8] {
        std::array::from_fn(|i| Self::from_index(i as u8))
    }
}

impl Default for FftCommConfig {
    fn default() -> Self {
        Self::from_index(0)
    }
}

/// Signed wavenumber index in standard DFT order: 0..n/2-1, then -n/2..-1.
pub fn wavenumber_index(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Distributed spectral coefficients: every rank owns all rows (ki) for a
/// contiguous range of columns (kj).
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub nx: usize,
    pub ny: usize,
    pub extent_u: f64,
    pub extent_v: f64,
    /// Owned slice of wavenumber space: `[0, nx) x [kj0, kj1)`.
    pub owned: Box2,
    /// Coefficients, shape `(nx, owned.nj())`, indexed `[ki, kj - kj0]`.
    pub data: Array2<Complex64>,
}

impl SpectralField {
    /// Physical wavenumbers (ku, kv) of a stored coefficient.
    pub fn wavenumbers(&self, ki: usize, kj: usize) -> (f64, f64) {
        let ku = std::f64::consts::TAU * wavenumber_index(ki, self.nx) as f64 / self.extent_u;
        let kv = std::f64::consts::TAU * wavenumber_index(kj, self.ny) as f64 / self.extent_v;
        (ku, kv)
    }

    /// Multiply each coefficient by `m(ku, kv)` in place. Local; no
    /// communication. The caller is responsible for keeping m(0,0) finite.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64, f64) -> Complex64) {
        for ki in 0..self.nx {
            for c in 0..self.owned.nj() {
                let kj = self.owned.j0 + c;
                let (ku, kv) = self.wavenumbers(ki, kj);
                self.data[[ki, c]] *= m(ku, kv);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

/// Contiguous ranges for `parts` owners over `n` lines; empty ranges when
/// there are more owners than lines.
fn line_ranges(n: usize, parts: usize) -> Vec<std::ops::Range<usize>> {
    if parts <= n {
        return split_balanced(n, parts);
    }
    let mut out = Vec::with_capacity(parts);
    for p in 0..parts {
        if p < n {
            out.push(p..p + 1);
        } else {
            out.push(n..n);
        }
    }
    out
}

/// Row-stage boxes: full j-lines for a range of i per rank.
fn row_boxes(mesh: &SurfaceMesh, pencils: bool) -> Vec<Box2> {
    let ranks = mesh.rank_count();
    let (px, py) = mesh.grid;
    if pencils {
        // Pencil ownership is independent of the block grid: consecutive
        // pencils are handed out in column-major grid order, so this
        // transpose crosses rank-grid rows.
        let ranges = line_ranges(mesh.nx, ranks);
        let mut boxes = vec![
            Box2 {
                i0: 0,
                i1: 0,
                j0: 0,
                j1: mesh.ny
            };
            ranks
        ];
        let mut p = 0;
        for pj in 0..py {
            for pi in 0..px {
                boxes[mesh.rank_at(pi, pj)] = Box2 {
                    i0: ranges[p].start,
                    i1: ranges[p].end,
                    j0: 0,
                    j1: mesh.ny,
                };
                p += 1;
            }
        }
        boxes
    } else {
        // Slab assignment: each rank-grid row re-splits its own block rows,
        // so this transpose only exchanges within grid rows.
        let block_rows = split_balanced(mesh.nx, px);
        (0..ranks)
            .map(|r| {
                let (pi, pj) = mesh.coords_of(r);
                let bi = block_rows[pi].clone();
                let sub = line_ranges(bi.len(), py)[pj].clone();
                Box2 {
                    i0: bi.start + sub.start,
                    i1: bi.start + sub.end,
                    j0: 0,
                    j1: mesh.ny,
                }
            })
            .collect()
    }
}

/// Column-stage boxes: full i-lines for a range of kj per rank.
fn col_boxes(mesh: &SurfaceMesh) -> Vec<Box2> {
    line_ranges(mesh.ny, mesh.rank_count())
        .into_iter()
        .map(|r| Box2 {
            i0: 0,
            i1: mesh.nx,
            j0: r.start,
            j1: r.end,
        })
        .collect()
}

fn intersect(a: Box2, b: Box2) -> Option<Box2> {
    let i0 = a.i0.max(b.i0);
    let i1 = a.i1.min(b.i1);
    let j0 = a.j0.max(b.j0);
    let j1 = a.j1.min(b.j1);
    (i0 < i1 && j0 < j1).then_some(Box2 { i0, i1, j0, j1 })
}

// ---------------------------------------------------------------------------
// Redistribution
// ---------------------------------------------------------------------------

struct Chunk {
    bounds: Box2,
    data: Vec<Complex64>,
}

impl Chunk {
    #[inline]
    fn get(&self, gi: usize, gj: usize) -> Complex64 {
        self.data[(gi - self.bounds.i0) * self.bounds.nj() + (gj - self.bounds.j0)]
    }
}

fn pack_chunk(src: &Array2<Complex64>, src_box: Box2, part: Box2) -> Vec<u8> {
    let mut w = Writer::with_capacity(16 + part.count() * 16);
    w.put_u32(part.i0 as u32);
    w.put_u32(part.i1 as u32);
    w.put_u32(part.j0 as u32);
    w.put_u32(part.j1 as u32);
    for gi in part.i0..part.i1 {
        for gj in part.j0..part.j1 {
            w.put_complex(src[[gi - src_box.i0, gj - src_box.j0]]);
        }
    }
    w.finish()
}

fn unpack_chunk(payload: &[u8]) -> Chunk {
    let mut r = Reader::new(payload);
    let bounds = Box2 {
        i0: r.u32() as usize,
        i1: r.u32() as usize,
        j0: r.u32() as usize,
        j1: r.u32() as usize,
    };
    let mut data = Vec::with_capacity(bounds.count());
    for _ in 0..bounds.count() {
        data.push(r.complex());
    }
    Chunk { bounds, data }
}

/// Move data from `src_boxes[rank]` ownership to `dst_boxes[rank]`
/// ownership. Returns the chunks this rank received (its own retained part
/// included). Collective; traced under `all_to_all`.
fn redistribute(
    local: &Array2<Complex64>,
    src_boxes: &[Box2],
    dst_boxes: &[Box2],
    all_to_all: bool,
    comm: &mut Comm,
) -> Vec<Chunk> {
    let me = comm.rank();
    let ranks = comm.size();
    let my_src = src_boxes[me];
    let mut chunks = Vec::new();

    if all_to_all {
        // Dense full exchange: one message to every rank, empty when there
        // is nothing for that peer.
        let sends: Vec<(usize, Vec<u8>)> = (0..ranks)
            .map(|t| {
                let payload = intersect(my_src, dst_boxes[t])
                    .map(|part| pack_chunk(local, my_src, part))
                    .unwrap_or_default();
                (t, payload)
            })
            .collect();
        for (_, payload) in comm.exchange(sends, Pattern::AllToAll) {
            if !payload.is_empty() {
                chunks.push(unpack_chunk(&payload));
            }
        }
    } else {
        // Pairwise rounds carrying only non-empty chunks; the retained part
        // never leaves the rank.
        if let Some(part) = intersect(my_src, dst_boxes[me]) {
            chunks.push(Chunk {
                bounds: part,
                data: part
                    .iter()
                    .map(|(gi, gj)| local[[gi - my_src.i0, gj - my_src.j0]])
                    .collect(),
            });
        }
        for k in 1..ranks {
            let to = (me + k) % ranks;
            let sends = intersect(my_src, dst_boxes[to])
                .map(|part| vec![(to, pack_chunk(local, my_src, part))])
                .unwrap_or_default();
            for (_, payload) in comm.exchange(sends, Pattern::AllToAll) {
                chunks.push(unpack_chunk(&payload));
            }
        }
    }
    chunks
}

// ---------------------------------------------------------------------------
// Stage transforms
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum LineAxis {
    AlongI,
    AlongJ,
}

/// Assemble received chunks for `my_box` and run the 1D transforms along
/// `axis`. With `reorder` the chunks are first scattered into the canonical
/// buffer; without it each line is gathered straight out of the chunks.
fn stage_transform(
    chunks: &[Chunk],
    my_box: Box2,
    axis: LineAxis,
    inverse: bool,
    reorder: bool,
) -> Array2<Complex64> {
    let (ni, nj) = (my_box.ni(), my_box.nj());
    let mut canonical = Array2::from_elem((ni, nj), Complex64::new(0.0, 0.0));
    if ni == 0 || nj == 0 {
        return canonical;
    }
    let line_len = match axis {
        LineAxis::AlongI => ni,
        LineAxis::AlongJ => nj,
    };
    let mut scratch = vec![Complex64::new(0.0, 0.0); line_len];

    if reorder {
        for c in chunks {
            for gi in c.bounds.i0..c.bounds.i1 {
                for gj in c.bounds.j0..c.bounds.j1 {
                    canonical[[gi - my_box.i0, gj - my_box.j0]] = c.get(gi, gj);
                }
            }
        }
        match axis {
            LineAxis::AlongJ => {
                for oi in 0..ni {
                    for oj in 0..nj {
                        scratch[oj] = canonical[[oi, oj]];
                    }
                    fft_line(&mut scratch, inverse);
                    for oj in 0..nj {
                        canonical[[oi, oj]] = scratch[oj];
                    }
                }
            }
            LineAxis::AlongI => {
                for oj in 0..nj {
                    for oi in 0..ni {
                        scratch[oi] = canonical[[oi, oj]];
                    }
                    fft_line(&mut scratch, inverse);
                    for oi in 0..ni {
                        canonical[[oi, oj]] = scratch[oi];
                    }
                }
            }
        }
    } else {
        let gather = |scratch: &mut [Complex64], fixed: usize| {
            for c in chunks {
                match axis {
                    LineAxis::AlongJ => {
                        if fixed >= c.bounds.i0 && fixed < c.bounds.i1 {
                            for gj in c.bounds.j0..c.bounds.j1 {
                                scratch[gj - my_box.j0] = c.get(fixed, gj);
                            }
                        }
                    }
                    LineAxis::AlongI => {
                        if fixed >= c.bounds.j0 && fixed < c.bounds.j1 {
                            for gi in c.bounds.i0..c.bounds.i1 {
                                scratch[gi - my_box.i0] = c.get(gi, fixed);
                            }
                        }
                    }
                }
            }
        };
        match axis {
            LineAxis::AlongJ => {
                for oi in 0..ni {
                    gather(&mut scratch, my_box.i0 + oi);
                    fft_line(&mut scratch, inverse);
                    for oj in 0..nj {
                        canonical[[oi, oj]] = scratch[oj];
                    }
                }
            }
            LineAxis::AlongI => {
                for oj in 0..nj {
                    gather(&mut scratch, my_box.j0 + oj);
                    fft_line(&mut scratch, inverse);
                    for oi in 0..ni {
                        canonical[[oi, oj]] = scratch[oi];
                    }
                }
            }
        }
    }
    canonical
}

/// Scatter chunks into a canonical buffer without transforming.
fn assemble(chunks: &[Chunk], my_box: Box2) -> Array2<Complex64> {
    let mut out = Array2::from_elem((my_box.ni(), my_box.nj()), Complex64::new(0.0, 0.0));
    for c in chunks {
        for gi in c.bounds.i0..c.bounds.i1 {
            for gj in c.bounds.j0..c.bounds.j1 {
                out[[gi - my_box.i0, gj - my_box.j0]] = c.get(gi, gj);
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Public transforms
// ---------------------------------------------------------------------------

fn check_sizes(mesh: &SurfaceMesh) {
    assert!(
        mesh.nx.is_power_of_two() && mesh.ny.is_power_of_two(),
        "distributed FFT requires power-of-two mesh sizes, got {}x{}",
        mesh.nx,
        mesh.ny
    );
}

/// Forward 2D transform of complex block-decomposed values (unnormalized).
pub fn forward2d_complex(
    values: &Array2<Complex64>,
    mesh: &SurfaceMesh,
    cfg: FftCommConfig,
    comm: &mut Comm,
) -> SpectralField {
    check_sizes(mesh);
    let blocks = mesh.boxes();
    let rows = row_boxes(mesh, cfg.pencils);
    let cols = col_boxes(mesh);
    let me = comm.rank();

    let chunks = redistribute(values, &blocks, &rows, cfg.all_to_all, comm);
    let row_data = stage_transform(&chunks, rows[me], LineAxis::AlongJ, false, cfg.reorder);
    let chunks = redistribute(&row_data, &rows, &cols, cfg.all_to_all, comm);
    let col_data = stage_transform(&chunks, cols[me], LineAxis::AlongI, false, cfg.reorder);

    SpectralField {
        nx: mesh.nx,
        ny: mesh.ny,
        extent_u: mesh.extent_u(),
        extent_v: mesh.extent_v(),
        owned: cols[me],
        data: col_data,
    }
}

/// Forward 2D transform of real block-decomposed values.
pub fn forward2d(
    values: &Array2<f64>,
    mesh: &SurfaceMesh,
    cfg: FftCommConfig,
    comm: &mut Comm,
) -> SpectralField {
    let complex = values.mapv(|v| Complex64::new(v, 0.0));
    forward2d_complex(&complex, mesh, cfg, comm)
}

/// Inverse 2D transform back to the block decomposition, normalized by
/// nx*ny so that inverse2d(forward2d(f)) == f.
pub fn inverse2d(
    spec: &SpectralField,
    mesh: &SurfaceMesh,
    cfg: FftCommConfig,
    comm: &mut Comm,
) -> Array2<Complex64> {
    check_sizes(mesh);
    assert_eq!(
        (spec.nx, spec.ny),
        (mesh.nx, mesh.ny),
        "spectral field layout does not match the mesh"
    );
    let blocks = mesh.boxes();
    let rows = row_boxes(mesh, cfg.pencils);
    let cols = col_boxes(mesh);
    let me = comm.rank();
    assert_eq!(spec.owned, cols[me], "spectral field owned box mismatch");

    // Column-stage inverse in place: own data is the single chunk.
    let own = [Chunk {
        bounds: spec.owned,
        data: spec.data.iter().cloned().collect(),
    }];
    let col_data = stage_transform(&own, cols[me], LineAxis::AlongI, true, cfg.reorder);

    let chunks = redistribute(&col_data, &cols, &rows, cfg.all_to_all, comm);
    let row_data = stage_transform(&chunks, rows[me], LineAxis::AlongJ, true, cfg.reorder);

    let chunks = redistribute(&row_data, &rows, &blocks, cfg.all_to_all, comm);
    let mut out = assemble(&chunks, blocks[me]);
    let scale = 1.0 / (mesh.nx * mesh.ny) as f64;
    out.mapv_inplace(|v| v * scale);
    out
}

/// Inverse transform returning the real part only, for spectra with the
/// conjugate symmetry of a real field.
pub fn inverse2d_real(
    spec: &SpectralField,
    mesh: &SurfaceMesh,
    cfg: FftCommConfig,
    comm: &mut Comm,
) -> Array2<f64> {
    inverse2d(spec, mesh, cfg, comm).mapv(|v| v.re)
}
