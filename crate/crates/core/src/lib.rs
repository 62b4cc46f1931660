//! Monotone submodular maximization under an unknown or stochastic knapsack
//! capacity.
//!
//! The crate provides the robust policies (density greedy, value greedy,
//! the deterministic single-valuable-item policy and the doubling universal
//! sequence), the stochastic-capacity pipeline (time-indexed and compact
//! relaxations, continuous greedy, contention-resolution rounding), and
//! brute-force oracles used to check every guarantee on small instances.
//!
//! All numeric code is generic over [`Scalar`], implemented for `f64`, `f32`
//! and exact [`Rational`] arithmetic.

pub mod error;
pub mod instances;
pub mod oracle;
pub mod policies;
pub mod scalar;
pub mod stochastic;
pub mod submodular;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use submodular::{ItemSet, SetFunction, SubmodularFunction};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Instance64 = instances::Instance<f64>;
pub type ExactInstance = instances::Instance<Rational>;
pub type Function64 = SubmodularFunction<f64>;
pub type ExactFunction = SubmodularFunction<Rational>;
pub type Distribution64 = instances::CapacityDistribution<f64>;
pub type ExactDistribution = instances::CapacityDistribution<Rational>;
