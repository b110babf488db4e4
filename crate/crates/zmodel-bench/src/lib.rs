//! An interface-instability simulator built as a communication benchmark.
//!
//! The crate runs a configurable number of ranks as concurrent in-process
//! workers connected by an instrumented message-passing layer, and solves
//! the evolution of a 2D fluid interface (position + sheet vorticity) under
//! low-, medium-, and high-order interface models. Each model order drives a
//! different global communication pattern:
//!
//! * low order — distributed 2D FFTs (all-to-all transposes),
//! * high order — far-field velocity sums (ring pass or spatial migration
//!   plus point halos),
//! * medium order — both at once.
//!
//! Every message is accounted per pattern class, so a run doubles as a
//! communication trace that can be exported, compared across configurations,
//! and asserted on in tests.
//!
//! Start with [`transport::RankGroup`] to run rank bodies, or with
//! [`driver::SimConfig`] / [`driver::run_sim`] for a whole problem deck.
//! The `examples/` directory has one runnable program per major capability;
//! the thin `zmodel-bench` binary exposes the same decks on the command
//! line.

pub mod birkhoff_rott;
pub mod driver;
pub mod fft;
pub mod mesh;
pub mod timeint;
pub mod transport;
pub mod util;
pub mod zmodel;
