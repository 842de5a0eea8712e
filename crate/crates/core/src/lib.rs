//! Cox point-process model of LEO/MEO satellite constellations.
//!
//! Orbits are drawn as an isotropic Poisson process of great circles on the
//! sphere of radius `r_s`, and satellites as independent Poisson processes on
//! each orbit. The crate evaluates the downlink metrics seen by a user on the
//! Earth's surface two ways:
//!
//! * [`analytic`]: numerical integration of the closed-form results
//!   (mean visible count, no-satellite probability, nearest-distance CCDF,
//!   Rayleigh and Nakagami-m SIR coverage, ergodic rate);
//! * [`montecarlo`]: direct simulation of [`constellation`] samples, with
//!   confidence intervals.
//!
//! [`fitting`] matches Cox parameters to a deterministic constellation
//! (e.g. a multi-shell Walker plan) at a given latitude, and [`cli`] exposes
//! everything behind the `satcox` binary.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod constellation;
pub mod error;
pub mod export;
pub mod fitting;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use analytic::{CoverageCurve, LinkBudget};
pub use constellation::{Constellation, CoxParams, ModelSpec, Observer, Orbit, Provenance, ShellSpec};
pub use error::{Error, Result};
pub use geometry::{GeometryParams, Point3};
pub use montecarlo::{EstimateWithCI, SimPlan};
pub use quadrature::QuadratureSpec;

/// Linear value of a decibel quantity.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Decibel value of a linear quantity.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
