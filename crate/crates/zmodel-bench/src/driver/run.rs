//! Run orchestration: spawn ranks, advance the deck, collect metrics and
//! imbalance reports, write outputs.

use super::config::{ConfigError, SimConfig, SolverChoice};
use super::init::init_rocket_rig;
use super::output::{
    gather_global, state_file_name, write_meta, write_state_csv, write_trace, GlobalState,
};
use crate::birkhoff_rott::{migrate_to_spatial, MigratedPoint, SpatialMesh};
use crate::mesh::refresh_ghosts;
use crate::timeint::rk3_step;
use crate::transport::{Comm, MergedTrace, RankGroup, ReduceOp, TransportError};
use crate::zmodel::ModelOrder;
use serde::Serialize;
use std::io;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

/// Per-step scalar diagnostics (identical on every rank).
#[derive(Debug, Clone, Serialize)]
pub struct StepMetrics {
    pub step: u64,
    pub t: f64,
    pub max_abs_z: f64,
}

/// Owned-point distribution over spatial blocks at one step.
#[derive(Debug, Clone, Serialize)]
pub struct ImbalanceReport {
    pub step: u64,
    pub fractions: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub max_over_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metrics {
    pub run_id: String,
    pub steps: Vec<StepMetrics>,
    pub imbalance: Vec<ImbalanceReport>,
}

/// Everything a run produces: the gathered final state, diagnostics, and
/// the merged communication trace.
#[derive(Debug)]
pub struct SimOutput {
    pub run_id: String,
    pub global: GlobalState,
    pub metrics: Metrics,
    pub trace: MergedTrace,
}

/// Count owned points per spatial block after migration and reduce the
/// distribution to every rank. Collective.
pub fn imbalance_report(
    field: &crate::mesh::SurfaceField,
    spatial: &SpatialMesh,
    step: u64,
    comm: &mut Comm,
) -> ImbalanceReport {
    let points: Vec<MigratedPoint> = field
        .owned
        .iter()
        .map(|(i, j)| MigratedPoint {
            pos: field.position(i as i64, j as i64),
            weight: [0.0; 3],
            home_rank: comm.rank() as u32,
            home_i: i as u32,
            home_j: j as u32,
        })
        .collect();
    let owned = migrate_to_spatial(points, spatial, comm);

    let mut one_hot = vec![0.0; comm.size()];
    one_hot[comm.rank()] = owned.len() as f64;
    let counts = comm.all_reduce(&one_hot, ReduceOp::Sum);
    let total: f64 = counts.iter().sum();
    let fractions: Vec<f64> = counts.iter().map(|c| c / total).collect();
    let min = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = fractions.iter().cloned().fold(0.0f64, f64::max);
    let mean = 1.0 / comm.size() as f64;
    ImbalanceReport {
        step,
        fractions,
        min,
        max,
        mean,
        max_over_mean: max / mean,
    }
}

/// Execute a validated deck to completion. Writes state snapshots during
/// the run and the trace/metrics documents at exit when an output
/// directory is configured.
pub fn run_sim(cfg: &SimConfig) -> Result<SimOutput, RunError> {
    cfg.validate()?;
    let mesh = cfg.surface_mesh()?;
    let model = cfg.zmodel(&mesh)?;
    let spatial = cfg.spatial_mesh()?;
    let run_id = cfg.run_id();
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        write_meta(dir, cfg)?;
    }
    let track_imbalance = cfg.solver == SolverChoice::Cutoff && cfg.order != ModelOrder::Low;

    let group = RankGroup::new(cfg.rank_grid)
        .with_scheduler(cfg.scheduler)
        .with_event_log(cfg.trace_events);

    let out = group.run(|comm| -> Result<(Option<GlobalState>, Metrics), String> {
        let mut field = init_rocket_rig(cfg, &mesh, comm.rank());
        refresh_ghosts(&mut field, comm);

        let mut metrics = Metrics {
            run_id: run_id.clone(),
            steps: Vec::with_capacity(cfg.steps as usize + 1),
            imbalance: Vec::new(),
        };
        let mut last_written: Option<u64> = None;

        let record_step = |field: &crate::mesh::SurfaceField, step: u64, comm: &mut Comm| {
            let max = comm.all_reduce(&[field.max_abs_z()], ReduceOp::Max)[0];
            StepMetrics {
                step,
                t: step as f64 * cfg.dt,
                max_abs_z: max,
            }
        };
        let report_due = |step: u64| {
            step == 0
                || step == cfg.steps
                || (cfg.write_every > 0 && step % cfg.write_every == 0)
        };

        metrics.steps.push(record_step(&field, 0, comm));
        if track_imbalance {
            metrics.imbalance.push(imbalance_report(&field, &spatial, 0, comm));
        }
        if cfg.out_dir.is_some() {
            let global = gather_global(&field, comm);
            if let (Some(dir), Some(global)) = (&cfg.out_dir, &global) {
                write_state_csv(&dir.join(state_file_name(0)), global).map_err(|e| e.to_string())?;
            }
            last_written = Some(0);
        }

        for s in 0..cfg.steps {
            rk3_step(&mut field, cfg.dt, s, &model, comm);
            let step = s + 1;
            metrics.steps.push(record_step(&field, step, comm));
            if track_imbalance && report_due(step) {
                metrics.imbalance.push(imbalance_report(&field, &spatial, step, comm));
            }
            if cfg.out_dir.is_some() && report_due(step) && last_written != Some(step) {
                let global = gather_global(&field, comm);
                if let (Some(dir), Some(global)) = (&cfg.out_dir, &global) {
                    write_state_csv(&dir.join(state_file_name(step)), global)
                        .map_err(|e| e.to_string())?;
                }
                last_written = Some(step);
            }
        }

        let global = gather_global(&field, comm);
        Ok((global, metrics))
    })?;

    let mut results = out.results;
    let (global, metrics) = match results.remove(0) {
        Ok((Some(global), metrics)) => (global, metrics),
        Ok((None, _)) => unreachable!("rank 0 always gathers"),
        Err(message) => {
            return Err(RunError::Io(io::Error::other(message)));
        }
    };

    if let Some(dir) = &cfg.out_dir {
        write_trace(dir, &run_id, &out.trace, cfg.trace_events)?;
        super::output::write_json(&dir.join("metrics.json"), &metrics)?;
    }

    Ok(SimOutput {
        run_id,
        global,
        metrics,
        trace: out.trace,
    })
}
