//! Third-order strong-stability-preserving Runge-Kutta time integration.
//!
//! The three-stage scheme is applied in increment form,
//!
//! ```text
//! k1 = F(u)            u1 = u + dt k1
//! k2 = F(u1)           u2 = u + dt/4 (k1 + k2)
//! k3 = F(u2)           u(t+dt) = u + dt/6 (k1 + k2 + 4 k3)
//! ```
//!
//! which is the Shu-Osher combination rearranged so that a vanishing
//! right-hand side reproduces the input state exactly. Ghosts are
//! refreshed before every derivative evaluation, and the model is invoked
//! exactly three times per step.

use crate::mesh::{refresh_ghosts, SurfaceField};
use crate::transport::Comm;
use crate::zmodel::ZModel;

/// Step and time bookkeeping for a run.
#[derive(Debug, Clone, Copy)]
pub struct TimeState {
    pub step: u64,
    pub dt: f64,
}

impl TimeState {
    pub fn new(dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        Self { step: 0, dt }
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }
}

/// Advance the field one step. Requires valid ghosts on entry and leaves
/// them valid on exit. Collective; aborts with the step number if the state
/// turns non-finite.
pub fn rk3_step(field: &mut SurfaceField, dt: f64, step: u64, model: &ZModel, comm: &mut Comm) {
    let base = field.clone();

    let k1 = model.derivatives(field, comm);

    let mut stage = base.clone();
    stage.axpy_deriv(dt, &k1);
    refresh_ghosts(&mut stage, comm);
    let k2 = model.derivatives(&stage, comm);

    let mut stage = base.clone();
    stage.axpy_deriv(0.25 * dt, &k1);
    stage.axpy_deriv(0.25 * dt, &k2);
    refresh_ghosts(&mut stage, comm);
    let k3 = model.derivatives(&stage, comm);

    *field = base;
    field.axpy_deriv(dt / 6.0, &k1);
    field.axpy_deriv(dt / 6.0, &k2);
    field.axpy_deriv(4.0 * dt / 6.0, &k3);
    refresh_ghosts(field, comm);

    if let Some((c, i, j)) = field.find_non_finite() {
        panic!(
            "rk3 step {step}: non-finite {} at node ({i},{j}) on rank {}",
            c.name(),
            comm.rank()
        );
    }
}

/// The same scheme on a scalar ODE y' = f(y); test hook for order and
/// stability-polynomial checks.
pub fn rk3_scalar(y: f64, dt: f64, f: impl Fn(f64) -> f64) -> f64 {
    let k1 = f(y);
    let u1 = y + dt * k1;
    let k2 = f(u1);
    let u2 = y + 0.25 * dt * (k1 + k2);
    let k3 = f(u2);
    y + dt / 6.0 * (k1 + k2 + 4.0 * k3)
}
