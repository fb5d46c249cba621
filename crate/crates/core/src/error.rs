use alloc::string::String;
use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid measure: mu[{index}] = {value} is not a positive finite number")]
    InvalidMeasure { index: usize, value: f64 },

    #[error("generator is not conservative: row {row} sums to {residual:e}")]
    NotConservative { row: usize, residual: f64 },

    #[error("generator is not positivity preserving: Q[{row}][{col}] = {value:e} < 0")]
    NotPositivityPreserving { row: usize, col: usize, value: f64 },

    #[error("generator is not mu-symmetric: mu[{x}]Q[{x}][{y}] - mu[{y}]Q[{y}][{x}] = {residual:e}")]
    NotSymmetric { x: usize, y: usize, residual: f64 },

    #[error("eigen-decomposition failed: {0}")]
    EigenFailure(String),

    #[error("field has a component of size {magnitude:e} in ker L; project it out first")]
    KernelComponent { magnitude: f64 },

    #[error("time integral diverges: exponent {exponent:e} carries coefficient {coefficient:e}")]
    ResonanceDivergence { exponent: f64, coefficient: f64 },

    #[error("input must be nonnegative, found {value:e} at index {index}")]
    NegativeInput { index: usize, value: f64 },

    #[error("Gamma_2 >= 0 fails (min eigenvalue {min_eigen:e} at point {point})")]
    CurvatureFailed { min_eigen: f64, point: usize },

    #[error("state space of size {n} exceeds the configured cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("length function is not symmetric: psi({g}) != psi({g}^-1)")]
    NotSymmetricPsi { g: usize },

    #[error("length function is nonzero at the identity: {value:e}")]
    NonzeroAtIdentity { value: f64 },

    #[error("length function is not conditionally negative (Gram eigenvalue {max_eigen:e} on mean-zero vectors)")]
    NotConditionallyNegative { max_eigen: f64 },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
