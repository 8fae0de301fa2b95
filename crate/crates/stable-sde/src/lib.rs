//! Numerical realization of mild solutions of semilinear stochastic
//! evolution equations driven by heavy-tailed stable noise, together with
//! Monte Carlo verification of the explicit tail, moment, continuity and
//! contraction bounds that govern them.
//!
//! The pieces:
//! - [`levy`]: the driving stable measure and its closed-form functionals
//! - [`noise`]: sample paths of the driver, by exact increments or by the
//!   truncated big/small-jump decomposition
//! - [`coeffs`]: named coefficient presets with certified constants
//! - [`convolution`]: the exponential Euler scheme and the fixed-point map
//! - [`bounds`]: every explicit constant and bound, plus the metrics
//! - [`montecarlo`]: reproducible parallel ensembles compared against the
//!   bounds
//! - [`scenario`]: the config format the CLI consumes

pub mod bounds;
pub mod coeffs;
pub mod convolution;
pub mod error;
pub mod levy;
pub mod noise;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
