//! Shared error type for the crate.

/// Errors surfaced by sample construction, statistics, and simulators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid mismatch: curves must share one grid ({0})")]
    GridMismatch(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("insufficient data: need n >= {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("lag {lag} out of range for sample size {n}")]
    LagOutOfRange { lag: usize, n: usize },
    #[error("lag norms cover lags 0..={available} but the kernel needs 0..={required}")]
    InsufficientLagCoverage { required: usize, available: usize },
    #[error("invalid bandwidth p = {0}; bandwidths must be positive and finite")]
    InvalidBandwidth(f64),
    #[error("invalid transform exponent beta = {0}")]
    InvalidExponent(f64),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("all kernel weights vanish for bandwidth p = {0}")]
    DegenerateWeights(f64),
    #[error(
        "kernel {0} is not supported for bandwidth selection (no finite characteristic exponent)"
    )]
    UnsupportedKernel(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
