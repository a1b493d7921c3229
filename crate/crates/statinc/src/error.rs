//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors reported by the library.
///
/// Numerical diagnostics carry enough context to distinguish a bad model
/// (minimality violated, pole hit) from a numerical breakdown (quadrature
/// not converged, indefinite matrix) and from plain misuse (dimension
/// mismatch, missing observation).
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Structural parameters out of range (n ≥ 1, μ ≥ 1 required, …).
    InvalidSpec(&'static str),
    /// A vector length does not match what the increment spec implies.
    DimensionMismatch { expected: usize, got: usize },
    /// Density construction rejected (negative samples, empty factors, …).
    InvalidDensity(&'static str),
    /// Evaluation requested at a non-removable pole of a density.
    Pole { lambda: f64 },
    /// The minimality integral diverges; interpolation error would be zero
    /// or the matrix `P` singular.
    MinimalityViolated { integral_estimate: f64 },
    /// Grid-doubling quadrature did not stabilize within the doubling cap.
    QuadratureNotConverged { residual: f64 },
    /// A matrix expected to be positive definite was not; reports the
    /// failing pivot and a cheap condition estimate.
    NotPositiveDefinite { pivot: usize, condition_estimate: f64 },
    /// Linear solve succeeded but the refined residual stayed too large.
    IllConditioned { condition_estimate: f64, residual: f64 },
    /// Normal-equation Gram matrix is numerically singular.
    SingularGram { effective_rank: usize, dim: usize },
    /// Fourier coefficients of the residual transfer function failed to
    /// vanish on the gap indices — the solve is inconsistent.
    OrthogonalityViolated { index: i64, magnitude: f64 },
    /// Increment-weight truncation horizon too small for the requested
    /// tolerance; the tail mass is reported.
    TruncationInsufficient { tail: f64 },
    /// A required observation is absent from the series.
    MissingObservation { t: i64 },
    /// The two mean-square-error routes disagree beyond tolerance.
    MseRouteMismatch { quadratic: f64, integral: f64 },
    /// An admissible-class constraint cannot be met (ε too small, bounds
    /// incompatible, …).
    ConstraintInfeasible(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid increment spec: {msg}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidDensity(msg) => write!(f, "invalid density: {msg}"),
            Error::Pole { lambda } => {
                write!(f, "density has a non-removable pole at lambda = {lambda}")
            }
            Error::MinimalityViolated { integral_estimate } => write!(
                f,
                "minimality condition violated (integral estimate {integral_estimate:e})"
            ),
            Error::QuadratureNotConverged { residual } => {
                write!(f, "quadrature did not converge (residual {residual:e})")
            }
            Error::NotPositiveDefinite {
                pivot,
                condition_estimate,
            } => write!(
                f,
                "matrix not positive definite at pivot {pivot} (condition estimate {condition_estimate:e})"
            ),
            Error::IllConditioned {
                condition_estimate,
                residual,
            } => write!(
                f,
                "ill-conditioned system: condition estimate {condition_estimate:e}, residual {residual:e}"
            ),
            Error::SingularGram {
                effective_rank,
                dim,
            } => write!(
                f,
                "singular Gram matrix: effective rank {effective_rank} of {dim}"
            ),
            Error::OrthogonalityViolated { index, magnitude } => write!(
                f,
                "orthogonality violated at index {index} (|w| = {magnitude:e})"
            ),
            Error::TruncationInsufficient { tail } => {
                write!(f, "weight truncation insufficient: tail mass {tail:e}")
            }
            Error::MissingObservation { t } => write!(f, "missing observation at t = {t}"),
            Error::MseRouteMismatch {
                quadratic,
                integral,
            } => write!(
                f,
                "mse routes disagree: quadratic form {quadratic}, frequency integral {integral}"
            ),
            Error::ConstraintInfeasible(msg) => write!(f, "infeasible constraint: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
