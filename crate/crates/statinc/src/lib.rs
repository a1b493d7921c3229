//! Mean-square optimal interpolation of a missing block in a stochastic
//! sequence with stationary n-th increments, observed either directly or
//! with additive stationary noise, plus the cointegrated-pair variant and
//! minimax-robust estimation over classes of admissible spectral densities.
//!
//! The estimation target is a linear functional `A = Σ_{k=0}^{N} a(k) ξ(k)`
//! of the unobserved values; observations are `ζ(m) = ξ(m) + η(m)` for all
//! integer `m` outside the gap `{0, …, N}`. Everything is second-order
//! theory: the optimal estimate is a Hilbert-space projection characterized
//! in the frequency domain, and all computations reduce to Fourier
//! coefficients of density ratios, Hermitian Toeplitz systems, and a small
//! amount of exact integer coefficient algebra.
//!
//! Module layout mirrors the pipeline:
//!
//! - [`increments`] — exact coefficient algebra for n-th increments with
//!   step μ (the `d`, `b`, `v`, `a_μ` families).
//! - [`spectral`] — evaluable spectral densities and the observation model,
//!   including the minimality condition that guarantees a nondegenerate
//!   problem.
//! - [`fourier`] — Fourier-coefficient extraction and assembly of the
//!   Toeplitz matrix set (`P`, `T`, `Q` and variants).
//! - [`interpolate`] — the linear-system solver, spectral characteristic,
//!   increment-domain weights, point estimates, and mean-square error.
//! - [`oracle`] — independent verification by Gaussian projection on a
//!   truncated observation window (pure covariance algebra, no
//!   frequency-domain solve).
//! - [`minimax`] — least-favorable density solvers for the admissible
//!   classes (reciprocal-integral lower bounds and ε-neighborhoods) and
//!   saddle-point verification.
//!
//! The crate is `no_std` + `alloc`; everything with IO lives in the
//! companion CLI crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod error;
pub mod math;
pub mod quad;

pub mod increments;
pub mod linalg;
pub mod spectral;

pub mod fourier;
pub mod interpolate;
pub mod minimax;
pub mod oracle;

pub use error::Error;
pub use increments::{CoefficientBundle, FunctionalSpec, IncrementSpec};
pub use interpolate::{InterpolationSolution, ObservationSeries, SolveOptions};
pub use spectral::{Density, ObservationModel};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
