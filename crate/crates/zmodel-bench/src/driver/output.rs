//! State gathering and file output: per-step CSV snapshots, deck echo,
//! trace and metrics documents.
//!
//! CSV rows are `i,j,x,y,z,w1,w2` in global (i, then j) order with values
//! printed to 17 significant digits, which round-trips every double
//! exactly; a state reloaded from CSV continues bit-for-bit.

use super::config::SimConfig;
use crate::mesh::{Component, SurfaceField, SurfaceMesh, NCOMP};
use crate::transport::{Comm, MergedTrace, Pattern};
use crate::util::wire::{Reader, Writer};
use ndarray::Array2;
use serde::Serialize;
use std::fs;
use std::io::{self, BufRead, Write as IoWrite};
use std::path::{Path, PathBuf};

/// The full mesh state on one rank, in global index order.
#[derive(Debug, Clone)]
pub struct GlobalState {
    pub nx: usize,
    pub ny: usize,
    pub comps: [Array2<f64>; NCOMP],
}

impl GlobalState {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            comps: std::array::from_fn(|_| Array2::zeros((nx, ny))),
        }
    }

    pub fn get(&self, c: Component, i: usize, j: usize) -> f64 {
        self.comps[c.index()][[i, j]]
    }

    /// Largest absolute elementwise difference.
    pub fn max_diff(&self, other: &GlobalState) -> f64 {
        assert_eq!((self.nx, self.ny), (other.nx, other.ny));
        let mut max = 0.0f64;
        for c in 0..NCOMP {
            for (a, b) in self.comps[c].iter().zip(other.comps[c].iter()) {
                max = max.max((a - b).abs());
            }
        }
        max
    }

    pub fn max_abs_z(&self) -> f64 {
        self.comps[Component::Z.index()]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Gather owned blocks to rank 0 (point-to-point pattern). Returns the
/// assembled state on rank 0, None elsewhere. Collective.
pub fn gather_global(field: &SurfaceField, comm: &mut Comm) -> Option<GlobalState> {
    let owned = field.owned;
    let mut w = Writer::with_capacity(16 + owned.count() * NCOMP * 8);
    w.put_u32(owned.i0 as u32);
    w.put_u32(owned.i1 as u32);
    w.put_u32(owned.j0 as u32);
    w.put_u32(owned.j1 as u32);
    for c in Component::ALL {
        for (i, j) in owned.iter() {
            w.put_f64(field.get(c, i as i64, j as i64));
        }
    }
    let received = comm.exchange(vec![(0, w.finish())], Pattern::PointToPoint);

    if comm.rank() != 0 {
        return None;
    }
    let mesh = &field.mesh;
    let mut global = GlobalState::zeros(mesh.nx, mesh.ny);
    for (_, payload) in received {
        let mut r = Reader::new(&payload);
        let (i0, i1, j0, j1) = (
            r.u32() as usize,
            r.u32() as usize,
            r.u32() as usize,
            r.u32() as usize,
        );
        for c in 0..NCOMP {
            for i in i0..i1 {
                for j in j0..j1 {
                    global.comps[c][[i, j]] = r.f64();
                }
            }
        }
    }
    Some(global)
}

/// Scatter a global state into one rank's field (restart path).
pub fn field_from_global(global: &GlobalState, mesh: &SurfaceMesh, rank: usize) -> SurfaceField {
    assert_eq!((global.nx, global.ny), (mesh.nx, mesh.ny));
    let mut field = SurfaceField::new(mesh.clone(), rank);
    for (i, j) in field.owned.iter() {
        for c in Component::ALL {
            field.set(c, i as i64, j as i64, global.get(c, i, j));
        }
    }
    field
}

pub fn state_file_name(step: u64) -> String {
    format!("step_{step:06}.csv")
}

/// Write one state snapshot; full double precision.
pub fn write_state_csv(path: &Path, state: &GlobalState) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "i,j,x,y,z,w1,w2")?;
    for i in 0..state.nx {
        for j in 0..state.ny {
            writeln!(
                out,
                "{i},{j},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                state.comps[0][[i, j]],
                state.comps[1][[i, j]],
                state.comps[2][[i, j]],
                state.comps[3][[i, j]],
                state.comps[4][[i, j]],
            )?;
        }
    }
    out.flush()
}

/// Read a state snapshot written by [`write_state_csv`].
pub fn read_state_csv(path: &Path) -> io::Result<GlobalState> {
    let file = io::BufReader::new(fs::File::open(path)?);
    let mut rows: Vec<(usize, usize, [f64; NCOMP])> = Vec::new();
    let mut nx = 0usize;
    let mut ny = 0usize;
    for (ln, line) in file.lines().enumerate() {
        let line = line?;
        if ln == 0 {
            if line.trim() != "i,j,x,y,z,w1,w2" {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("unexpected header: {line}"),
                ));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 + NCOMP {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("line {}: expected {} fields", ln + 1, 2 + NCOMP),
            ));
        }
        let bad = |what: &str| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {what}", ln + 1));
        let i: usize = parts[0].parse().map_err(|_| bad("bad i"))?;
        let j: usize = parts[1].parse().map_err(|_| bad("bad j"))?;
        let mut vals = [0.0; NCOMP];
        for (k, v) in vals.iter_mut().enumerate() {
            *v = parts[2 + k].parse().map_err(|_| bad("bad value"))?;
        }
        nx = nx.max(i + 1);
        ny = ny.max(j + 1);
        rows.push((i, j, vals));
    }
    let mut state = GlobalState::zeros(nx, ny);
    for (i, j, vals) in rows {
        for (c, v) in vals.into_iter().enumerate() {
            state.comps[c][[i, j]] = v;
        }
    }
    Ok(state)
}

/// Write the deck echo next to the outputs.
pub fn write_meta(dir: &Path, cfg: &SimConfig) -> io::Result<()> {
    let text = serde_json::to_string_pretty(cfg).expect("deck serializes");
    fs::write(dir.join("meta.json"), text + "\n")
}

/// Write the trace export document.
pub fn write_trace(dir: &Path, run_id: &str, trace: &MergedTrace, events: bool) -> io::Result<PathBuf> {
    let doc = trace.export(run_id, events);
    let path = dir.join("trace.json");
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap() + "\n")?;
    Ok(path)
}

/// Write any serializable metrics document.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    fs::write(path, serde_json::to_string_pretty(value).unwrap() + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng;

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let mut state = GlobalState::zeros(4, 3);
        for c in 0..NCOMP {
            for i in 0..4 {
                for j in 0..3 {
                    state.comps[c][[i, j]] =
                        (rng::uniform(9, (c * 12 + i * 3 + j) as u64, 0) - 0.5) * 1e3;
                }
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.csv");
        write_state_csv(&path, &state).unwrap();
        let back = read_state_csv(&path).unwrap();
        assert_eq!((back.nx, back.ny), (4, 3));
        for c in 0..NCOMP {
            for (a, b) in state.comps[c].iter().zip(back.comps[c].iter()) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn flat_two_by_two_sheet_writes_four_equal_z_rows() {
        let mut state = GlobalState::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                state.comps[Component::Z.index()][[i, j]] = 1.5;
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("flat.csv");
        write_state_csv(&path, &state).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 4);
        for row in rows {
            assert!(row.split(',').nth(4).unwrap().starts_with("1.5"), "{row}");
        }
    }
}
