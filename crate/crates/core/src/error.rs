//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("product space has {assignments} assignments, exceeding the exact-mode cap of {cap}")]
    CapExceeded { assignments: u128, cap: u64 },

    #[error("statistic returned a non-finite value at assignment index {assignment}")]
    NonFiniteValue { assignment: usize },

    #[error("non-finite Monte Carlo sample (seed {seed}, counter {counter})")]
    NonFiniteSample { seed: u64, counter: u64 },

    #[error("coordinate {k} out of range for n = {n}")]
    CoordinateOutOfRange { k: usize, n: usize },

    #[error("alpha = {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("exact mode requires all components to carry finite atom lists")]
    NotExactMode,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("matrix is not symmetric within tolerance (max asymmetry {0:.3e})")]
    Asymmetric(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("covariance matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("missing smoothness constant: {0}")]
    MissingConstant(&'static str),

    #[error("missing gradient evaluator on test function")]
    MissingGradient,

    #[error("missing moment summary for a sampler component")]
    MissingMoments,

    #[error("Monte Carlo configuration invalid: {0}")]
    InvalidMcConfig(String),

    #[error("evaluation method unavailable: {0}")]
    MethodUnavailable(String),

    #[error("eigensolver failed to converge after {0} sweeps")]
    EigenNoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
