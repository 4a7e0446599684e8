//! Minimax testing of an identity covariance against Toeplitz alternatives.
//!
//! Given `n` independent `p`-dimensional Gaussian vectors, the crate tests
//! `Σ = I` against stationary (Toeplitz) covariances whose correlations
//! decay polynomially or exponentially and whose squared correlations sum
//! to at least `ψ²`. The building blocks are:
//!
//! - [`ellipsoid`]: optimal weight plans, separation rates, power bounds.
//! - [`toeplitz`]: covariance construction, positive-definiteness checks,
//!   alternative families and Gaussian sampling.
//! - [`statistic`]: the weighted U-statistic, its moments and the
//!   Frobenius-norm baseline statistic.
//! - [`montecarlo`]: seeded, replicate-parallel calibration and power studies.

// Comparisons written as `!(x > y)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ellipsoid;
pub mod error;
pub mod montecarlo;
pub mod normal;
pub mod seed;
pub mod statistic;
pub mod toeplitz;

pub use ellipsoid::{
    extremal_oracle, separation_rate, sharp_type2_bound, solve_weight_plan, EllipsoidClass,
    EllipsoidSpec, OracleSolution, WeightPlan,
};
pub use error::{Error, Result};
pub use normal::{normal_cdf, normal_quantile};
pub use statistic::TestOutcome;
pub use toeplitz::{GaussianSampler, SampleMatrix, ToeplitzSpec};
