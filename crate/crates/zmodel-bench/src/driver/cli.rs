//! Command-line interface for the thin `zmodel-bench` binary.

use super::bench::{bench, bench_csv, BenchCase};
use super::config::{default_grid, IcType, SimConfig, SolverChoice};
use super::run::{run_sim, RunError};
use crate::mesh::BcType;
use crate::transport::{Pattern, Scheduler};
use crate::zmodel::ModelOrder;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "zmodel-bench", version, about = "Interface-instability communication benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single problem deck.
    Run(Box<RunArgs>),
    /// Run a benchmark case over a list of rank counts.
    Bench(BenchArgs),
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    if let Some((a, b)) = s.split_once(['x', 'X']) {
        let px: usize = a.trim().parse().map_err(|_| format!("bad rank grid {s:?}"))?;
        let py: usize = b.trim().parse().map_err(|_| format!("bad rank grid {s:?}"))?;
        return Ok((px, py));
    }
    let n: usize = s.trim().parse().map_err(|_| format!("bad rank grid {s:?}"))?;
    Ok(default_grid(n))
}

fn parse_order(s: &str) -> Result<ModelOrder, String> {
    match s {
        "low" => Ok(ModelOrder::Low),
        "medium" => Ok(ModelOrder::Medium),
        "high" => Ok(ModelOrder::High),
        _ => Err(format!("unknown order {s:?}; expected low, medium, or high")),
    }
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    match s {
        "exact" => Ok(SolverChoice::Exact),
        "cutoff" => Ok(SolverChoice::Cutoff),
        _ => Err(format!("unknown solver {s:?}; expected exact or cutoff")),
    }
}

fn parse_bc(s: &str) -> Result<BcType, String> {
    match s {
        "periodic" => Ok(BcType::Periodic),
        "free" => Ok(BcType::Free),
        _ => Err(format!("unknown boundary {s:?}; expected periodic or free")),
    }
}

fn parse_ic(s: &str) -> Result<IcType, String> {
    match s {
        "single_mode" | "single-mode" | "single" => Ok(IcType::SingleMode),
        "multi_mode" | "multi-mode" | "multi" => Ok(IcType::MultiMode),
        _ => Err(format!("unknown initial condition {s:?}; expected single_mode or multi_mode")),
    }
}

fn parse_scheduler(s: &str) -> Result<Scheduler, String> {
    match s {
        "threaded" => Ok(Scheduler::Threaded),
        "sequential" => Ok(Scheduler::Sequential),
        _ => Err(format!("unknown scheduler {s:?}; expected threaded or sequential")),
    }
}

fn parse_case(s: &str) -> Result<BenchCase, String> {
    BenchCase::parse(s)
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 64)]
    pub nx: usize,
    #[arg(long, default_value_t = 64)]
    pub ny: usize,
    /// Rank grid as PxQ (e.g. 2x2) or a plain count.
    #[arg(long, default_value = "2x2", value_parser = parse_grid)]
    pub ranks: (usize, usize),
    #[arg(long, default_value = "low", value_parser = parse_order)]
    pub order: ModelOrder,
    #[arg(long, default_value = "exact", value_parser = parse_solver)]
    pub solver: SolverChoice,
    #[arg(long, default_value = "periodic", value_parser = parse_bc)]
    pub bc: BcType,
    #[arg(long, default_value = "multi_mode", value_parser = parse_ic)]
    pub ic: IcType,
    #[arg(long, default_value_t = 0.05)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 4)]
    pub modes: u32,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub cutoff: f64,
    /// Kernel desingularization; defaults to a quarter of the x spacing.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub atwood: f64,
    #[arg(long, default_value_t = 25.0)]
    pub gravity: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub mu: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 10)]
    pub steps: u64,
    /// FFT communication configuration index 0..7.
    #[arg(long = "fft-config", default_value_t = 0)]
    pub fft_config: u8,
    /// Half-width of the cubic simulation box; defaults to 19 for the low
    /// order and 3 otherwise.
    #[arg(long)]
    pub domain: Option<f64>,
    /// Output directory for CSV snapshots, trace.json, and metrics.json.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
    /// Snapshot cadence in steps (0: initial and final states only).
    #[arg(long = "write-every", default_value_t = 0)]
    pub write_every: u64,
    #[arg(long, default_value = "threaded", value_parser = parse_scheduler)]
    pub scheduler: Scheduler,
    /// Include the per-send event log in trace.json (large).
    #[arg(long = "trace-events", default_value_t = false)]
    pub trace_events: bool,
}

impl RunArgs {
    pub fn to_config(&self) -> SimConfig {
        let half = self.domain.unwrap_or(match self.order {
            ModelOrder::Low => 19.0,
            _ => 3.0,
        });
        SimConfig {
            nx: self.nx,
            ny: self.ny,
            rank_grid: self.ranks,
            order: self.order,
            solver: self.solver,
            bc: self.bc,
            ic: self.ic,
            amplitude: self.amplitude,
            modes: self.modes,
            seed: self.seed,
            domain_lo: [-half; 3],
            domain_hi: [half; 3],
            cutoff: self.cutoff,
            atwood: self.atwood,
            gravity: self.gravity,
            mu: self.mu,
            epsilon: self.epsilon,
            dt: self.dt,
            steps: self.steps,
            fft_config: self.fft_config,
            out_dir: self.out.clone(),
            write_every: self.write_every,
            scheduler: self.scheduler,
            trace_events: self.trace_events,
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Case family: low-weak, low-strong, high-weak, high-strong, fft-sweep.
    #[arg(long, value_parser = parse_case)]
    pub case: BenchCase,
    /// Comma-separated rank counts.
    #[arg(long, value_delimiter = ',', default_value = "1,4")]
    pub ranks: Vec<usize>,
    /// Also write the CSV report here.
    #[arg(long = "out")]
    pub out: Option<PathBuf>,
}

/// Execute a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.to_config();
            let out = run_sim(&cfg)?;
            let last = out.metrics.steps.last().unwrap();
            println!("run_id: {}", out.run_id);
            println!(
                "completed {} steps (t = {}); max |z| = {:.6e}",
                cfg.steps, last.t, last.max_abs_z
            );
            println!("pattern            messages        bytes");
            for p in Pattern::ALL {
                let t = out.trace.total(p);
                println!("{:<18} {:>10} {:>12}", p.name(), t.messages_sent, t.bytes_sent);
            }
            if let Some(report) = out.metrics.imbalance.last() {
                println!(
                    "imbalance at step {}: max/mean = {:.4}",
                    report.step, report.max_over_mean
                );
            }
            if let Some(dir) = &cfg.out_dir {
                println!("outputs in {}", dir.display());
            }
            Ok(0)
        }
        Command::Bench(args) => {
            let rows = bench(args.case, &args.ranks);
            let csv = bench_csv(&rows);
            print!("{csv}");
            if let Some(path) = &args.out {
                std::fs::write(path, &csv)?;
            }
            let failures = rows.iter().filter(|r| r.status != "pass").count();
            if failures > 0 {
                eprintln!("{failures} of {} cells failed", rows.len());
            }
            Ok(0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parser_accepts_both_forms() {
        assert_eq!(parse_grid("2x2").unwrap(), (2, 2));
        assert_eq!(parse_grid("4X1").unwrap(), (4, 1));
        assert_eq!(parse_grid("16").unwrap(), (4, 4));
        assert!(parse_grid("two").is_err());
    }

    #[test]
    fn run_args_build_a_valid_deck() {
        let cli = Cli::parse_from([
            "zmodel-bench",
            "run",
            "--nx",
            "16",
            "--ny",
            "16",
            "--ranks",
            "2x2",
            "--order",
            "high",
            "--solver",
            "cutoff",
            "--bc",
            "free",
            "--ic",
            "single_mode",
            "--steps",
            "2",
        ]);
        let Command::Run(args) = cli.command else {
            panic!("expected run");
        };
        let cfg = args.to_config();
        cfg.validate().unwrap();
        assert_eq!(cfg.domain_hi, [3.0; 3]);
        assert_eq!(cfg.rank_grid, (2, 2));
    }

    #[test]
    fn bench_args_parse_rank_list() {
        let cli = Cli::parse_from([
            "zmodel-bench",
            "bench",
            "--case",
            "fft-sweep",
            "--ranks",
            "1,4,16",
        ]);
        let Command::Bench(args) = cli.command else {
            panic!("expected bench");
        };
        assert_eq!(args.case, BenchCase::FftSweep);
        assert_eq!(args.ranks, vec![1, 4, 16]);
    }
}
