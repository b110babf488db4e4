//! Initial conditions for the rocket-rig problem.

use super::config::{IcType, SimConfig};
use crate::mesh::{Component, SurfaceField, SurfaceMesh};
use crate::util::rng;

/// Build the initial interface: x/y on the flat parameter grid, z the
/// chosen perturbation profile scaled by the amplitude, vorticity zero.
/// Phases of the multi-mode profile come from a counter-based generator
/// keyed by (seed, mode), so the state is identical for every rank grid.
pub fn init_rocket_rig(cfg: &SimConfig, mesh: &SurfaceMesh, rank: usize) -> SurfaceField {
    let mut field = SurfaceField::new(mesh.clone(), rank);
    let phases: Vec<(f64, f64)> = (1..=cfg.modes as u64)
        .map(|k| {
            (
                std::f64::consts::TAU * rng::uniform(cfg.seed, k, 0),
                std::f64::consts::TAU * rng::uniform(cfg.seed, k, 1),
            )
        })
        .collect();

    for (i, j) in field.owned.iter() {
        let u = mesh.u_of(i);
        let v = mesh.v_of(j);
        // Normalized coordinates in [-1, 1].
        let uh = 2.0 * (u - mesh.u0) / mesh.extent_u() - 1.0;
        let vh = 2.0 * (v - mesh.v0) / mesh.extent_v() - 1.0;
        let profile = match cfg.ic {
            IcType::SingleMode => {
                (std::f64::consts::PI * uh).cos() * (std::f64::consts::PI * vh).cos()
            }
            IcType::MultiMode => {
                let mut sum = 0.0;
                for (k, (phi, psi)) in phases.iter().enumerate() {
                    let m = (k + 1) as f64;
                    sum += (std::f64::consts::TAU * m * uh + phi).cos()
                        * (std::f64::consts::TAU * m * vh + psi).cos();
                }
                sum / cfg.modes as f64
            }
        };
        field.set(Component::X, i as i64, j as i64, u);
        field.set(Component::Y, i as i64, j as i64, v);
        field.set(Component::Z, i as i64, j as i64, cfg.amplitude * profile);
    }
    field
}
