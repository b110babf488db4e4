//! Small shared utilities: a counter-based PRNG and a byte-wire codec.

pub mod rng;
pub mod wire;
