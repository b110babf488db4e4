//! Problem driver: deck configuration, rocket-rig initial conditions, run
//! orchestration, output writing, the benchmark harness, and the CLI.

pub mod bench;
pub mod cli;
pub mod config;
pub mod init;
pub mod output;
pub mod run;

pub use bench::{bench, bench_csv, BenchCase, BenchRow};
pub use config::{default_grid, ConfigError, IcType, SimConfig, SolverChoice};
pub use init::init_rocket_rig;
pub use output::{
    field_from_global, gather_global, read_state_csv, state_file_name, write_state_csv,
    GlobalState,
};
pub use run::{imbalance_report, run_sim, ImbalanceReport, Metrics, RunError, SimOutput, StepMetrics};
