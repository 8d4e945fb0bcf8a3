//! Invariant-ellipsoid certificates and annotated C contracts for
//! uncertain discrete-time systems in LFT form.
//!
//! The crate models an uncertain system as the feedback interconnection
//! of a nominal LTI system and a structured static linear time-varying
//! perturbation, overapproximates it by an augmented LTI system coupled
//! with a pointwise quadratic constraint, synthesizes state-invariant
//! and output-bounding ellipsoids by semidefinite feasibility, derives
//! rigorous floating-point correction factors, and emits ACSL-annotated
//! C sources carrying the resulting contracts — including ghost-code
//! closed-loop contracts that leave controller code untouched.

pub mod error;
pub mod numerics;
pub mod report;
pub mod sim;

pub use error::{Error, Result};
