//! Stationary stochastic six vertex model and ASEP toolkit.
//!
//! Samples the six vertex model on a rectangle with two-sided boundary data,
//! implements the basic / second-class-particle / microscopic-concavity
//! couplings, evaluates the closed-form equilibrium quantities, enumerates
//! tiny lattices exactly, runs the continuous-time ASEP, and bundles the
//! Monte Carlo estimators that check the exact identities and tail shapes
//! against those references.

pub mod analytics;
pub mod asep;
pub mod couplings;
pub mod error;
pub mod model;
pub mod noise;
pub mod oracle;
pub mod parallel;
pub mod scalar;
pub mod stats;

pub use error::Error;

/// Default concrete scalar for everything that is not exact enumeration.
pub type Real = f64;

/// Model parameters at the default scalar.
pub type Params = model::ModelParams<Real>;

pub type Result<T> = std::result::Result<T, Error>;
