//! Problem decks: full run configuration with validation and the two
//! benchmark deck families (multi-mode periodic, single-mode free).

use crate::birkhoff_rott::SpatialMesh;
use crate::fft::FftCommConfig;
use crate::mesh::{BcType, SurfaceMesh, HALO};
use crate::transport::Scheduler;
use crate::zmodel::{BrSolver, ModelOrder, PhysicsParams, ZModel};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Initial interface perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IcType {
    SingleMode,
    MultiMode,
}

/// Far-field solver selection (ignored by the low-order model).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Exact,
    Cutoff,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("invalid deck: {0}")]
pub struct ConfigError(pub String);

/// A complete problem deck. Validation is total: `validate` rejects every
/// inconsistent combination before any rank spawns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub nx: usize,
    pub ny: usize,
    pub rank_grid: (usize, usize),
    pub order: ModelOrder,
    pub solver: SolverChoice,
    pub bc: BcType,
    pub ic: IcType,
    /// Initial perturbation amplitude; zero gives the flat equilibrium.
    pub amplitude: f64,
    /// Mode count of the multi-mode perturbation.
    pub modes: u32,
    pub seed: u64,
    /// Simulation box; the surface parameter domain is its x/y face.
    pub domain_lo: [f64; 3],
    pub domain_hi: [f64; 3],
    pub cutoff: f64,
    pub atwood: f64,
    pub gravity: f64,
    pub mu: f64,
    /// Desingularization length; None selects the grid-proportional
    /// default (a quarter of the x spacing).
    pub epsilon: Option<f64>,
    pub dt: f64,
    pub steps: u64,
    /// FFT communication configuration index 0..7.
    pub fft_config: u8,
    pub out_dir: Option<PathBuf>,
    /// State-output cadence in steps; 0 writes only the initial and final
    /// states (when an output directory is set).
    pub write_every: u64,
    pub scheduler: Scheduler,
    /// Record the per-send event log in the exported trace.
    pub trace_events: bool,
}

impl SimConfig {
    /// Multi-mode periodic deck (low-order family): 64x64 nodes in the
    /// (-19..19) box.
    pub fn multi_mode_default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            rank_grid: (2, 2),
            order: ModelOrder::Low,
            solver: SolverChoice::Exact,
            bc: BcType::Periodic,
            ic: IcType::MultiMode,
            amplitude: 0.05,
            modes: 4,
            seed: 7,
            domain_lo: [-19.0, -19.0, -19.0],
            domain_hi: [19.0, 19.0, 19.0],
            cutoff: 0.5,
            atwood: 0.5,
            gravity: 25.0,
            mu: 1e-3,
            epsilon: None,
            dt: 1e-3,
            steps: 10,
            fft_config: 0,
            out_dir: None,
            write_every: 0,
            scheduler: Scheduler::Threaded,
            trace_events: false,
        }
    }

    /// Single-mode free-boundary deck (high-order cutoff family): 64x64
    /// nodes, cutoff 0.5, in the (-3..3) box.
    pub fn single_mode_default() -> Self {
        Self {
            nx: 64,
            ny: 64,
            rank_grid: (2, 2),
            order: ModelOrder::High,
            solver: SolverChoice::Cutoff,
            bc: BcType::Free,
            ic: IcType::SingleMode,
            amplitude: 0.05,
            modes: 1,
            seed: 7,
            domain_lo: [-3.0, -3.0, -3.0],
            domain_hi: [3.0, 3.0, 3.0],
            cutoff: 0.5,
            atwood: 0.5,
            gravity: 25.0,
            mu: 1e-3,
            epsilon: None,
            dt: 1e-3,
            steps: 10,
            fft_config: 0,
            out_dir: None,
            write_every: 0,
            scheduler: Scheduler::Threaded,
            trace_events: false,
        }
    }

    pub fn rank_count(&self) -> usize {
        self.rank_grid.0 * self.rank_grid.1
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        let (px, py) = self.rank_grid;
        if px == 0 || py == 0 {
            return err(format!("rank grid {:?} has a zero dimension", self.rank_grid));
        }
        if px > self.nx || py > self.ny {
            return err(format!(
                "rank grid {:?} larger than mesh {}x{}",
                self.rank_grid, self.nx, self.ny
            ));
        }
        if self.nx / px < HALO || self.ny / py < HALO {
            return err(format!(
                "rank grid {:?} leaves blocks narrower than the ghost depth {HALO}",
                self.rank_grid
            ));
        }
        if self.order != ModelOrder::High && self.bc == BcType::Free {
            return err("low and medium order require periodic boundaries".into());
        }
        if self.order != ModelOrder::High
            && !(self.nx.is_power_of_two() && self.ny.is_power_of_two())
        {
            return err(format!(
                "orders using FFTs require power-of-two mesh sizes, got {}x{}",
                self.nx, self.ny
            ));
        }
        if self.order != ModelOrder::Low
            && self.solver == SolverChoice::Cutoff
            && self.cutoff <= 0.0
        {
            return err(format!("cutoff solver requires cutoff > 0, got {}", self.cutoff));
        }
        if self.amplitude < 0.0 {
            return err(format!("amplitude must be non-negative, got {}", self.amplitude));
        }
        if self.modes == 0 {
            return err("multi-mode perturbation needs at least one mode".into());
        }
        if !(self.dt > 0.0) {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        if self.fft_config >= 8 {
            return err(format!("fft config index {} out of range 0..8", self.fft_config));
        }
        for d in 0..3 {
            if !(self.domain_hi[d] > self.domain_lo[d]) {
                return err(format!(
                    "degenerate domain box: lo {:?} hi {:?}",
                    self.domain_lo, self.domain_hi
                ));
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return err(format!("epsilon must be positive, got {eps}"));
            }
        }
        if !(self.atwood > 0.0 && self.atwood <= 1.0) {
            return err(format!("atwood number must be in (0, 1], got {}", self.atwood));
        }
        if self.gravity < 0.0 {
            return err(format!("gravity must be non-negative, got {}", self.gravity));
        }
        if self.mu < 0.0 {
            return err(format!("viscosity must be non-negative, got {}", self.mu));
        }
        Ok(())
    }

    pub fn surface_mesh(&self) -> Result<SurfaceMesh, ConfigError> {
        SurfaceMesh::new(
            self.nx,
            self.ny,
            (self.domain_lo[0], self.domain_hi[0]),
            (self.domain_lo[1], self.domain_hi[1]),
            self.rank_grid,
            self.bc,
        )
        .map_err(ConfigError)
    }

    pub fn spatial_mesh(&self) -> Result<SpatialMesh, ConfigError> {
        SpatialMesh::new(self.domain_lo, self.domain_hi, self.rank_grid).map_err(ConfigError)
    }

    pub fn effective_epsilon(&self, mesh: &SurfaceMesh) -> f64 {
        self.epsilon
            .unwrap_or_else(|| crate::birkhoff_rott::BrKernelParams::default_epsilon(mesh))
    }

    pub fn physics(&self, mesh: &SurfaceMesh) -> PhysicsParams {
        PhysicsParams {
            atwood: self.atwood,
            gravity: self.gravity,
            mu: self.mu,
            epsilon: self.effective_epsilon(mesh),
        }
    }

    pub fn zmodel(&self, mesh: &SurfaceMesh) -> Result<ZModel, ConfigError> {
        let solver = match self.solver {
            SolverChoice::Exact => BrSolver::Exact,
            SolverChoice::Cutoff => BrSolver::Cutoff {
                spatial: self.spatial_mesh()?,
                cutoff: self.cutoff,
            },
        };
        Ok(ZModel {
            order: self.order,
            physics: self.physics(mesh),
            solver,
            fft_cfg: FftCommConfig::from_index(self.fft_config),
        })
    }

    /// Deterministic identifier echoed in the trace and metrics documents.
    pub fn run_id(&self) -> String {
        format!(
            "zb-{:x}-{}x{}-r{}x{}-{:?}-{}steps",
            self.seed, self.nx, self.ny, self.rank_grid.0, self.rank_grid.1, self.order, self.steps
        )
        .to_lowercase()
    }
}

/// Near-square rank grid for a rank count: the closest factor pair.
pub fn default_grid(ranks: usize) -> (usize, usize) {
    assert!(ranks >= 1);
    let mut py = (ranks as f64).sqrt() as usize;
    while py > 1 && ranks % py != 0 {
        py -= 1;
    }
    let py = py.max(1);
    (ranks / py, py)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_decks_validate() {
        SimConfig::multi_mode_default().validate().unwrap();
        SimConfig::single_mode_default().validate().unwrap();
    }

    #[test]
    fn low_order_with_free_boundaries_is_rejected() {
        let mut cfg = SimConfig::multi_mode_default();
        cfg.bc = BcType::Free;
        assert!(cfg.validate().is_err());
        cfg.order = ModelOrder::Medium;
        assert!(cfg.validate().is_err());
        cfg.order = ModelOrder::High;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn cutoff_solver_needs_positive_cutoff() {
        let mut cfg = SimConfig::single_mode_default();
        cfg.cutoff = 0.0;
        assert!(cfg.validate().is_err());
        cfg.cutoff = -1.0;
        assert!(cfg.validate().is_err());
        cfg.cutoff = 0.25;
        assert!(cfg.validate().is_ok());
        // The low order never invokes the far-field solver.
        cfg.order = ModelOrder::Low;
        cfg.bc = BcType::Periodic;
        cfg.ic = IcType::MultiMode;
        cfg.cutoff = 0.0;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn fft_orders_require_power_of_two() {
        let mut cfg = SimConfig::multi_mode_default();
        cfg.nx = 48;
        assert!(cfg.validate().is_err());
        cfg.order = ModelOrder::High;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn near_square_grids() {
        assert_eq!(default_grid(1), (1, 1));
        assert_eq!(default_grid(2), (2, 1));
        assert_eq!(default_grid(4), (2, 2));
        assert_eq!(default_grid(6), (3, 2));
        assert_eq!(default_grid(16), (4, 4));
    }

    #[test]
    fn run_id_is_deterministic() {
        let cfg = SimConfig::multi_mode_default();
        assert_eq!(cfg.run_id(), cfg.run_id());
    }
}
