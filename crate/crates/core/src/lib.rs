//! Simulation and error-probability analysis of space shift keying (SSK)
//! links aided by a reconfigurable intelligent surface (RIS) when the
//! RIS-UE channel is only known through a noisy estimate.
//!
//! The crate is organised bottom-up:
//!
//! - [`math`]: special functions, quadrature, empirical statistics and
//!   reproducible random streams.
//! - [`channel`]: Rayleigh BS-RIS and Rician RIS-UE channels, and the
//!   imperfect-CSI composition `H = ζĤ + √(1-ζ²)ΔH`.
//! - [`system`]: RIS phase policies, received-signal synthesis, ML
//!   detection and detector complexity.
//! - [`analysis`]: closed-form, quadrature and asymptotic pairwise error
//!   probabilities and the ABEP union bound.
//! - [`montecarlo`]: the sharded, reproducible BER simulator.
//! - [`experiments`]: configuration files, figure presets, CSV output and
//!   the self-check report.

pub mod analysis;
pub mod channel;
mod error;
pub mod experiments;
pub mod math;
pub mod montecarlo;
pub mod system;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Converts a decibel value to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
