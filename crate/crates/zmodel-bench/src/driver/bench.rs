//! Benchmark harness: scaling sweeps over the deck families plus the FFT
//! configuration sweep, reported as CSV rows tagged pass/fail.

use super::config::{default_grid, IcType, SimConfig, SolverChoice};
use super::run::run_sim;
use crate::mesh::BcType;
use crate::transport::Pattern;
use crate::zmodel::ModelOrder;
use std::fmt;
use std::time::Instant;

/// Benchmark case families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchCase {
    LowWeak,
    LowStrong,
    HighWeak,
    HighStrong,
    FftSweep,
}

impl BenchCase {
    pub const ALL: [BenchCase; 5] = [
        BenchCase::LowWeak,
        BenchCase::LowStrong,
        BenchCase::HighWeak,
        BenchCase::HighStrong,
        BenchCase::FftSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchCase::LowWeak => "low-weak",
            BenchCase::LowStrong => "low-strong",
            BenchCase::HighWeak => "high-weak",
            BenchCase::HighStrong => "high-strong",
            BenchCase::FftSweep => "fft-sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|c| c.name()).collect();
                format!("unknown case {s:?}; expected one of {}", names.join(", "))
            })
    }
}

impl fmt::Display for BenchCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One benchmark cell: a deck at a rank count (and FFT config for sweeps).
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub case_name: &'static str,
    pub nx: usize,
    pub ny: usize,
    pub ranks: usize,
    pub fft_config: u8,
    pub steps: u64,
    pub wall_ms: f64,
    pub pattern_messages: [u64; 6],
    pub pattern_bytes: [u64; 6],
    pub max_abs_z: f64,
    pub status: String,
}

/// Deck for one cell of a case at a given rank count.
pub fn case_deck(case: BenchCase, ranks: usize) -> SimConfig {
    let grid = default_grid(ranks);
    match case {
        BenchCase::LowWeak => {
            // Fixed 32x32 nodes per rank: the mesh grows with sqrt(R).
            let mut cfg = SimConfig::multi_mode_default();
            cfg.rank_grid = grid;
            cfg.nx = 32 * grid.0;
            cfg.ny = 32 * grid.1;
            cfg.steps = 3;
            cfg
        }
        BenchCase::LowStrong => {
            let mut cfg = SimConfig::multi_mode_default();
            cfg.rank_grid = grid;
            cfg.nx = 64;
            cfg.ny = 64;
            cfg.steps = 3;
            cfg
        }
        BenchCase::HighWeak => {
            // Multi-mode periodic deck solved at high order with the cutoff
            // solver in the small box.
            let mut cfg = SimConfig::single_mode_default();
            cfg.ic = IcType::MultiMode;
            cfg.modes = 4;
            cfg.bc = BcType::Periodic;
            cfg.order = ModelOrder::High;
            cfg.solver = SolverChoice::Cutoff;
            cfg.rank_grid = grid;
            cfg.nx = 32 * grid.0;
            cfg.ny = 32 * grid.1;
            cfg.steps = 2;
            cfg
        }
        BenchCase::HighStrong => {
            let mut cfg = SimConfig::single_mode_default();
            cfg.rank_grid = grid;
            cfg.nx = 64;
            cfg.ny = 64;
            cfg.steps = 2;
            cfg
        }
        BenchCase::FftSweep => {
            let mut cfg = SimConfig::multi_mode_default();
            cfg.rank_grid = grid;
            cfg.nx = 8;
            cfg.ny = 8;
            cfg.steps = 2;
            cfg
        }
    }
}

/// Run every cell of a case over the rank list. Per-cell failures are
/// recorded in the row status and the sweep continues. The FFT sweep also
/// cross-checks that all eight configurations agree numerically.
pub fn bench(case: BenchCase, rank_list: &[usize]) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &ranks in rank_list {
        let cfgs: Vec<u8> = match case {
            BenchCase::FftSweep => (0..8).collect(),
            _ => vec![0],
        };
        let mut sweep_states: Vec<Option<super::output::GlobalState>> = Vec::new();
        for &fft_config in &cfgs {
            let mut deck = case_deck(case, ranks);
            deck.fft_config = fft_config;
            let started = Instant::now();
            let result = run_sim(&deck);
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut row = BenchRow {
                case_name: case.name(),
                nx: deck.nx,
                ny: deck.ny,
                ranks,
                fft_config,
                steps: deck.steps,
                wall_ms,
                pattern_messages: [0; 6],
                pattern_bytes: [0; 6],
                max_abs_z: f64::NAN,
                status: "pass".to_string(),
            };
            match result {
                Ok(out) => {
                    for (k, p) in Pattern::ALL.into_iter().enumerate() {
                        let t = out.trace.total(p);
                        row.pattern_messages[k] = t.messages_sent;
                        row.pattern_bytes[k] = t.bytes_sent;
                    }
                    row.max_abs_z = out.global.max_abs_z();
                    if case == BenchCase::FftSweep {
                        if let Some(Some(reference)) = sweep_states.first() {
                            let diff = out.global.max_diff(reference);
                            if diff > 1e-10 {
                                row.status = format!("fail: differs from config 0 by {diff:e}");
                            }
                        }
                        sweep_states.push(Some(out.global));
                    }
                }
                Err(e) => {
                    row.status = format!("fail: {e}");
                    if case == BenchCase::FftSweep {
                        sweep_states.push(None);
                    }
                }
            }
            rows.push(row);
        }
    }
    rows
}

/// Render rows as CSV (header included).
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("case,nx,ny,ranks,fft_config,steps,wall_ms");
    for p in Pattern::ALL {
        out.push_str(&format!(",{}_messages,{}_bytes", p.name(), p.name()));
    }
    out.push_str(",max_abs_z,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3}",
            r.case_name, r.nx, r.ny, r.ranks, r.fft_config, r.steps, r.wall_ms
        ));
        for k in 0..6 {
            out.push_str(&format!(",{},{}", r.pattern_messages[k], r.pattern_bytes[k]));
        }
        out.push_str(&format!(",{:.6e},{}\n", r.max_abs_z, r.status));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_names_round_trip() {
        for case in BenchCase::ALL {
            assert_eq!(BenchCase::parse(case.name()).unwrap(), case);
        }
        assert!(BenchCase::parse("nope").is_err());
    }

    #[test]
    fn weak_decks_grow_with_the_rank_grid() {
        let small = case_deck(BenchCase::LowWeak, 1);
        let large = case_deck(BenchCase::LowWeak, 4);
        assert_eq!((small.nx, small.ny), (32, 32));
        assert_eq!((large.nx, large.ny), (64, 64));
        let strong1 = case_deck(BenchCase::LowStrong, 1);
        let strong4 = case_deck(BenchCase::LowStrong, 4);
        assert_eq!((strong1.nx, strong1.ny), (strong4.nx, strong4.ny));
    }

    #[test]
    fn sweep_produces_one_row_per_cell_and_cross_checks() {
        let rows = bench(BenchCase::FftSweep, &[1, 4]);
        assert_eq!(rows.len(), 2 * 8);
        assert!(rows.iter().all(|r| r.status == "pass"), "{rows:?}");
        // At R=4 the dense and pairwise schedules have different counts.
        let msgs = |cfg: u8| {
            rows.iter()
                .find(|r| r.ranks == 4 && r.fft_config == cfg)
                .unwrap()
                .pattern_messages[1]
        };
        assert_ne!(msgs(0), msgs(4));
        let csv = bench_csv(&rows);
        assert_eq!(csv.lines().count(), 17);
        assert!(csv.starts_with("case,nx,ny,ranks"));
    }

    #[test]
    fn strong_scaling_shrinks_per_rank_fft_bytes() {
        let rows = bench(BenchCase::LowStrong, &[1, 4]);
        assert!(rows.iter().all(|r| r.status == "pass"));
        let total_bytes = |ranks: usize| {
            rows.iter()
                .find(|r| r.ranks == ranks)
                .unwrap()
                .pattern_bytes[1]
        };
        // Remote traffic appears once the mesh is split.
        assert_eq!(total_bytes(1), 0);
        assert!(total_bytes(4) > 0);
    }
}
