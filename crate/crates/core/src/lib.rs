//! Explicit multivariate normal-approximation error bounds for nonlinear
//! statistics of independent random variables.
//!
//! The crate has three layers:
//!
//! 1. **Exact engine** ([`model`], [`statistic`], [`table`]): finite
//!    product spaces are enumerated outright, and the coordinate
//!    difference operators (Laplacian, resampling RMS, past/future
//!    conditional expectations) are evaluated as value tables. Monte
//!    Carlo counterparts live in [`mc`] with counter-based deterministic
//!    randomness.
//! 2. **Bound calculators** ([`bounds`], [`rademacher`], [`runs`],
//!    [`quadforms`]): explicit upper bounds on `|E g(F) - E g(Y)|` for a
//!    smooth test function `g` and a Gaussian target `Y`, assembled from
//!    covariation statistics and third moments, plus specialized
//!    closed-form bounds for symmetric sign functionals, m-runs, and
//!    quadratic forms.
//! 3. **Verification** ([`verify`], [`identities`], [`corpus`]):
//!    certified test functions with analytic Gaussian means, quadrature
//!    and Monte Carlo evaluation of both sides, and suites that check
//!    every operator identity and every bound against enumerated truth.

pub mod bounds;
pub mod corpus;
pub mod error;
pub mod identities;
pub mod matrix;
pub mod mc;
pub mod model;
pub mod quadforms;
pub mod rademacher;
pub mod rng;
pub mod runs;
pub mod statistic;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::DMat;
pub use model::{Atom, ComponentDistribution, MomentSummary, ProductModel, EXACT_CAP};
pub use statistic::{MultilinearPoly, StatisticVector};
pub use table::{AssignmentSpace, CovariationSummary, JointTable, RandomVariableTable};
