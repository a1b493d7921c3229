//! Independent brute-force verification by Gaussian linear projection.
//!
//! Everything here is second-order algebra on covariances derived from the
//! densities: autocovariances of the observed increment sequence come from
//! Fourier coefficients of the weighted observed density `|κ|²p`, noise
//! covariances from `g`, and the optimal weights solve plain normal
//! equations on a truncated observation window. No linear system from the
//! frequency-domain solver is reused, so agreement between this module and
//! the interpolator is a genuine two-route check.
//!
//! The projection subspace is exactly the estimate class of the solver:
//! increments `ζ^{(n)}(k,μ)` for `k ≤ -1` and `k ≥ N+μn+1` (a window of
//! length K on each side), plus the deterministic boundary term on raw
//! values. Projecting on more observable combinations would produce a
//! strictly smaller error and falsely fail the solver.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::increments::{CoefficientBundle, FunctionalSpec, IncrementSpec};
use crate::interpolate::ObservationSeries;
use crate::linalg::{dot, SymMat};
use crate::math::{binomial, SplitMix64};
use crate::quad::{self, QuadOpts};
use crate::spectral::ObservationModel;
use crate::Result;

/// Autocovariances derived from the model densities.
#[derive(Debug, Clone)]
pub struct CovarianceTable {
    /// `R_inc(m)`: autocovariance of the observed increment `ζ^{(n)}(·,μ)`,
    /// index = lag.
    pub r_inc: Vec<f64>,
    /// `R_noise(m)`: autocovariance of the stationary noise η.
    pub r_noise: Vec<f64>,
}

impl CovarianceTable {
    #[inline]
    fn inc(&self, lag: i64) -> f64 {
        self.r_inc[lag.unsigned_abs() as usize]
    }

    #[inline]
    fn noise(&self, lag: i64) -> f64 {
        self.r_noise[lag.unsigned_abs() as usize]
    }

    /// `Cov(ζ^{(n)}(k,μ), η(j))` — only the noise part of the increment
    /// correlates with η.
    fn inc_noise(&self, spec: &IncrementSpec, k: i64, j: i64) -> f64 {
        let (n, mu) = (spec.n(), spec.mu());
        let mut acc = 0.0;
        for l in 0..=n {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(n, l) as f64 * self.noise(k - (l * mu) as i64 - j);
        }
        acc
    }
}

/// Covariance tables up to `max_lag`, with a positive-semidefiniteness
/// spot check on random Toeplitz minors.
pub fn covariances(
    model: &ObservationModel,
    max_lag: usize,
    opts: &QuadOpts,
) -> Result<CovarianceTable> {
    if model.is_cointegrated() {
        return Err(Error::InvalidSpec(
            "oracle covariances cover signal-plus-noise models; reduce cointegrated pairs first",
        ));
    }
    model.require_minimality(opts)?;
    let r_inc = coeffs_of(model, |l| model.observed_weighted(l), max_lag, opts)?;
    let r_noise = if model.g().is_zero() {
        vec![0.0; max_lag + 1]
    } else {
        coeffs_of(model, |l| model.g().eval(l), max_lag, opts)?
    };
    let table = CovarianceTable { r_inc, r_noise };

    // spot-check PSD on a few random principal Toeplitz minors
    let mut rng = SplitMix64::new(0x5eed);
    for _ in 0..4 {
        let size = 2 + rng.below(6.min(max_lag + 1));
        let m = SymMat::from_toeplitz(&table.r_inc, size.min(max_lag + 1));
        let eigs = m.eigenvalues();
        if eigs[0] < -1e-10 * m.trace().max(1.0) {
            return Err(Error::QuadratureNotConverged { residual: eigs[0] });
        }
    }
    Ok(table)
}

fn coeffs_of<W>(
    model: &ObservationModel,
    w: W,
    max_lag: usize,
    opts: &QuadOpts,
) -> Result<Vec<f64>>
where
    W: Fn(f64) -> Result<f64>,
{
    match model.grid_len() {
        Some(m) => {
            let m_eff = m.max(4 * (max_lag + 1)).next_power_of_two();
            quad::fourier_coeffs_fixed(w, max_lag, m_eff)
        }
        None => quad::fourier_coeffs_adaptive(w, max_lag, opts, 0.0),
    }
}

/// Result of projecting the target functional onto the truncated
/// observation window.
#[derive(Debug, Clone)]
pub struct Projection {
    /// One-sided window length K.
    pub window: usize,
    /// Weights on `ζ^{(n)}(k,μ)` by increment index.
    pub weights: BTreeMap<i64, f64>,
    /// Residual variance of the projection = mean-square error of the
    /// reconstructed estimate.
    pub mse: f64,
    /// Variance of the target functional `H`.
    pub target_variance: f64,
}

/// Project `H = Σ b(k) ζ^{(n)}(k,μ) - Σ a(k) η(k)` onto the span of the
/// observed increments within the window, by normal equations.
pub fn project(
    model: &ObservationModel,
    functional: &FunctionalSpec,
    window: usize,
    opts: &QuadOpts,
) -> Result<Projection> {
    if window < 1 {
        return Err(Error::InvalidSpec("oracle window must be >= 1"));
    }
    let spec = *model.spec();
    let bundle = CoefficientBundle::new(&spec, functional)?;
    let dim = spec.system_dim() as i64;

    let indices: Vec<i64> = (-(window as i64)..0)
        .chain(dim..dim + window as i64)
        .collect();

    let max_lag = spec.gap_end() + 2 * spec.boundary_len() + 2 * window + 2;
    let table = covariances(model, max_lag, opts)?;

    // gram matrix of the observation span
    let m = indices.len();
    let mut gram = SymMat::zeros(m);
    for i in 0..m {
        for j in i..m {
            gram.set(i, j, table.inc(indices[i] - indices[j]));
        }
    }

    // cross-covariances of the target with each observation
    let a = functional.coeffs();
    let b = &bundle.b;
    let mut rhs = vec![0.0; m];
    for (i, &ki) in indices.iter().enumerate() {
        let mut acc = 0.0;
        for (k, &bk) in b.iter().enumerate() {
            acc += bk * table.inc(k as i64 - ki);
        }
        for (k, &ak) in a.iter().enumerate() {
            acc -= ak * table.inc_noise(&spec, ki, k as i64);
        }
        rhs[i] = acc;
    }

    // target variance
    let mut var_h = 0.0;
    for (k, &bk) in b.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            var_h += bk * bj * table.inc(k as i64 - j as i64);
        }
    }
    for (k, &bk) in b.iter().enumerate() {
        for (j, &aj) in a.iter().enumerate() {
            var_h -= 2.0 * bk * aj * table.inc_noise(&spec, k as i64, j as i64);
        }
    }
    for (k, &ak) in a.iter().enumerate() {
        for (j, &aj) in a.iter().enumerate() {
            var_h += ak * aj * table.noise(k as i64 - j as i64);
        }
    }

    if functional.is_zero() {
        return Ok(Projection {
            window,
            weights: BTreeMap::new(),
            mse: 0.0,
            target_variance: 0.0,
        });
    }

    let w = gram.solve_pivoted(&rhs)?;
    let mse = (var_h - dot(&w, &rhs)).max(0.0);

    let scale = w.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut weights = BTreeMap::new();
    for (i, &ki) in indices.iter().enumerate() {
        if w[i].abs() > 1e-13 * (1.0 + scale) {
            weights.insert(ki, w[i]);
        }
    }
    Ok(Projection {
        window,
        weights,
        mse,
        target_variance: var_h,
    })
}

impl Projection {
    /// Reconstruct the full estimate from a series: projection weights on
    /// increments plus the `-Σ v(k) ζ(k)` boundary term, for comparison
    /// with the interpolator's estimate.
    pub fn estimate(
        &self,
        spec: &IncrementSpec,
        functional: &FunctionalSpec,
        series: &ObservationSeries,
    ) -> Result<f64> {
        let bundle = CoefficientBundle::new(spec, functional)?;
        let (n, mu) = (spec.n(), spec.mu());
        let mut acc = 0.0;
        for (&k, &w) in &self.weights {
            let mut inc = 0.0;
            for l in 0..=n {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                inc += sign * binomial(n, l) as f64 * series.get(k - (l * mu) as i64)?;
            }
            acc += w * inc;
        }
        for k in -(spec.boundary_len() as i64)..0 {
            acc -= bundle.v_at(k) * series.get(k)?;
        }
        Ok(acc)
    }
}
