//! Simulation, falsification, and audit harnesses.

pub mod dd;
pub mod rng;
