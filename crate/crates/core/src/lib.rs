//! Outage analysis of partition-based RIS-aided MIMO Rayleigh channels.
//!
//! The crate covers channel sampling under the pure-reflect (PR),
//! activate-reflect (AR), flip-reflect (FR) and passive-beamforming (PB)
//! schemes, reproducible parallel Monte Carlo, the analytic outage
//! expressions (characteristic-function inversion, shifted-exponential
//! products, correlated-Rayleigh surrogate), exact DMT curves and an
//! experiment runner with figure presets.

pub mod analytic;
pub mod channel;
pub mod dmt;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
