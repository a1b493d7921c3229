//! The interpolation solver.
//!
//! Pipeline: the coefficient bundle rewrites the target functional on
//! increments, the Fourier matrix set turns densities into a linear system
//! `P c = [D a]_{+μn} - T a_μ`, and the solution `c` defines the spectral
//! characteristic. Its increment-domain transfer function
//!
//! `G(λ) = B(e^{iλ}) - A(e^{iλ})(1-e^{iλμ})^n g(λ)/p_red(λ) - C(e^{iλ})/p_red(λ)`
//!
//! carries all frequency-domain content: the optimal estimate is
//! `Σ_k w(k) ζ^{(n)}(k,μ) - Σ_{k=-μn}^{-1} v(k) ζ(k)` with `w(k)` the
//! Fourier coefficients of `G`. Orthogonality of the solve is equivalent
//! to `w(k) ≈ 0` on `0..=N+μn`, which is re-checked here by quadrature,
//! independently of the linear solver.
//!
//! The mean-square error has two routes — the quadratic form and the
//! frequency-domain integrals — and both are computed; disagreement is a
//! diagnostic failure, and the quadratic form is the value reported.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::fourier::{self, FourierMatrixSet};
use crate::increments::{CoefficientBundle, FunctionalSpec, IncrementSpec};
use crate::linalg::dot;
use crate::math::{abs, binomial, i_lambda_pow, inc_kernel, one_minus_exp_pow, poly_at};
use crate::quad::{self, QuadOpts};
use crate::spectral::ObservationModel;
use crate::Result;

/// Numeric options for the solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub quad: QuadOpts,
    /// Truncation tolerance for the increment-weight tail mass.
    pub weight_tol: f64,
    /// Largest one-sided truncation horizon for the weight support.
    pub max_weight_span: usize,
    /// Tolerance for the independent orthogonality re-check on 0..=N+μn.
    pub orthogonality_tol: f64,
    /// Relative residual bound for the linear solve.
    pub residual_tol: f64,
    /// Agreement tolerance between the two mean-square-error routes.
    pub mse_check_tol: f64,
    /// Bound on residual imaginary parts of the computed weights.
    pub imag_tol: f64,
    /// Extract increment weights (and run the orthogonality re-check).
    /// The minimax iteration disables this: it only needs `c` and the
    /// error, and grid-tabulated densities have band-limited discrete
    /// spectra for which a 1e-8 tail is not generally reachable.
    pub compute_weights: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            quad: QuadOpts::default(),
            weight_tol: 1e-8,
            max_weight_span: 10_000,
            orthogonality_tol: 1e-8,
            residual_tol: 1e-9,
            mse_check_tol: 1e-6,
            imag_tol: 1e-10,
            compute_weights: true,
        }
    }
}

/// Observations ζ(t) by integer time; the gap must be absent.
#[derive(Debug, Clone, Default)]
pub struct ObservationSeries {
    values: BTreeMap<i64, f64>,
}

impl ObservationSeries {
    pub fn new(spec: &IncrementSpec, pairs: impl IntoIterator<Item = (i64, f64)>) -> Result<Self> {
        let values: BTreeMap<i64, f64> = pairs.into_iter().collect();
        if values.keys().any(|&t| t >= 0 && t <= spec.gap_end() as i64) {
            return Err(Error::InvalidSpec(
                "series must not contain observations inside the gap",
            ));
        }
        Ok(Self { values })
    }

    pub fn get(&self, t: i64) -> Result<f64> {
        self.values
            .get(&t)
            .copied()
            .ok_or(Error::MissingObservation { t })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Everything produced by one solve: system data, weights and error.
#[derive(Debug, Clone)]
pub struct InterpolationSolution {
    model: ObservationModel,
    functional: FunctionalSpec,
    bundle: CoefficientBundle,
    matrices: FourierMatrixSet,
    c: Vec<f64>,
    rhs_eff: Vec<f64>,
    mse: f64,
    solve_residual: f64,
    increment_weights: BTreeMap<i64, f64>,
    boundary_weights: BTreeMap<i64, f64>,
    orthogonality_sup: f64,
    weight_imag_sup: f64,
    opts: SolveOptions,
}

/// Optimal linear estimate of `Σ a(k) ξ(k)` for any observation model
/// (signal-plus-noise, noise-free, or cointegrated — the matrix variant
/// and the effective noise density follow from the model's mode).
pub fn solve(
    model: &ObservationModel,
    functional: &FunctionalSpec,
    opts: &SolveOptions,
) -> Result<InterpolationSolution> {
    let bundle = CoefficientBundle::new(model.spec(), functional)?;
    let matrices = fourier::build(model, &opts.quad)?;
    finish_solve(model, functional, bundle, matrices, None, opts)
}

/// Optimal estimate of the functional from observations of a sequence
/// cointegrated with the signal (the β-variant of [`solve`]).
pub fn solve_cointegrated(
    model: &ObservationModel,
    functional: &FunctionalSpec,
    opts: &SolveOptions,
) -> Result<InterpolationSolution> {
    if !model.is_cointegrated() {
        return Err(Error::InvalidSpec(
            "solve_cointegrated expects a cointegrated model",
        ));
    }
    solve(model, functional, opts)
}

/// Direct estimate of the single unobserved value ξ(p): assembles the
/// shifted coefficient vector `d_{μ,p}`, the sparse column-selected
/// `T_p`, and the binomial functional `a_n` without going through the
/// general functional bundle. Equivalent to `solve` with the indicator
/// functional.
pub fn solve_point(
    model: &ObservationModel,
    p: usize,
    opts: &SolveOptions,
) -> Result<InterpolationSolution> {
    let spec = *model.spec();
    if p > spec.gap_end() {
        return Err(Error::InvalidSpec("point index outside the gap"));
    }
    let functional = FunctionalSpec::point(&spec, p)?;
    let bundle = CoefficientBundle::new(&spec, &functional)?;
    let matrices = fourier::build(model, &opts.quad)?;

    let dim = spec.system_dim();
    let (n, mu) = (spec.n(), spec.mu());

    // d_{μ,p} = (d_μ(p), …, d_μ(0), 0, …, 0)
    let mut d_vec = vec![0.0; dim];
    for k in 0..=p {
        d_vec[k] = bundle.d[p - k] as f64;
    }
    // a_n = ((-1)^k C(n,k))_{k=0..n}, zero-extended
    let mut a_n = vec![0.0; dim];
    for (k, slot) in a_n.iter_mut().enumerate().take(n + 1) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * binomial(n, k) as f64;
    }
    // (T_p)_{l,k} = T_{l, p+μk} for 0 ≤ k ≤ n; zero columns beyond (a_n
    // vanishes there as well)
    let t = matrices.t_coeffs();
    let mut rhs = d_vec;
    for (l, slot) in rhs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (k, &ak) in a_n.iter().enumerate().take(n + 1) {
            let m = p + mu * k;
            acc += t[m.abs_diff(l)] * ak;
        }
        *slot -= acc;
    }

    finish_solve(model, &functional, bundle, matrices, Some(rhs), opts)
}

/// Estimate of the single value ξ(p) from a series, with its error.
pub fn estimate_point(
    model: &ObservationModel,
    p: usize,
    series: &ObservationSeries,
    opts: &SolveOptions,
) -> Result<(f64, f64)> {
    let sol = solve_point(model, p, opts)?;
    Ok((sol.estimate(series)?, sol.mse()))
}

fn finish_solve(
    model: &ObservationModel,
    functional: &FunctionalSpec,
    bundle: CoefficientBundle,
    matrices: FourierMatrixSet,
    rhs_override: Option<Vec<f64>>,
    opts: &SolveOptions,
) -> Result<InterpolationSolution> {
    let spec = *model.spec();
    let dim = spec.system_dim();

    let rhs_eff = match rhs_override {
        Some(r) => r,
        None => {
            let ta = matrices.t_apply(&bundle.a_mu);
            bundle
                .rhs
                .iter()
                .zip(&ta)
                .map(|(r, t)| r - t)
                .collect::<Vec<f64>>()
        }
    };

    let p_mat = matrices.p_matrix();
    let (c, residual) = p_mat.solve_refined(&rhs_eff)?;
    if residual > opts.residual_tol {
        let chol = p_mat.cholesky()?;
        return Err(Error::IllConditioned {
            condition_estimate: chol.condition_estimate(),
            residual,
        });
    }

    // quadratic-form error: ⟨rhs_eff, P⁻¹ rhs_eff⟩ + ⟨Q a, a⟩
    let mut mse = dot(&rhs_eff, &c) + matrices.q_quadratic_form(functional.coeffs());
    if mse < 0.0 {
        debug_assert!(mse > -1e-9 * (1.0 + abs(mse)));
        mse = 0.0;
    }

    let mut sol = InterpolationSolution {
        model: model.clone(),
        functional: functional.clone(),
        bundle,
        matrices,
        c,
        rhs_eff,
        mse,
        solve_residual: residual,
        increment_weights: BTreeMap::new(),
        boundary_weights: BTreeMap::new(),
        orthogonality_sup: 0.0,
        weight_imag_sup: 0.0,
        opts: *opts,
    };
    if opts.compute_weights {
        sol.compute_weights(dim)?;
    }
    Ok(sol)
}

impl InterpolationSolution {
    pub fn model(&self) -> &ObservationModel {
        &self.model
    }

    pub fn functional(&self) -> &FunctionalSpec {
        &self.functional
    }

    pub fn bundle(&self) -> &CoefficientBundle {
        &self.bundle
    }

    pub fn matrices(&self) -> &FourierMatrixSet {
        &self.matrices
    }

    /// Solution coefficients `c_μ(0..N+μn)`.
    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// Effective right-hand side `[D a]_{+μn} - T a_μ` of the solve.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs_eff
    }

    /// Relative residual of the linear solve.
    pub fn solve_residual(&self) -> f64 {
        self.solve_residual
    }

    /// Mean-square error (quadratic-form route).
    pub fn mse(&self) -> f64 {
        self.mse
    }

    /// Largest in-gap transfer coefficient seen by the independent
    /// orthogonality re-check.
    pub fn orthogonality_sup(&self) -> f64 {
        self.orthogonality_sup
    }

    /// Largest residual imaginary part among computed weights.
    pub fn weight_imag_sup(&self) -> f64 {
        self.weight_imag_sup
    }

    /// Weights on observed increments `ζ^{(n)}(k,μ)`, truncated support.
    pub fn increment_weights(&self) -> &BTreeMap<i64, f64> {
        &self.increment_weights
    }

    /// Weights `-v(k)` on the raw boundary values ζ(k), k = -μn..-1.
    pub fn boundary_weights(&self) -> &BTreeMap<i64, f64> {
        &self.boundary_weights
    }

    /// Increment-domain transfer function `G(λ)`.
    pub fn transfer(&self, lambda: f64) -> Result<Complex64> {
        let spec = self.model.spec();
        let (n, mu) = (spec.n(), spec.mu());
        let b = poly_at(&self.bundle.b, lambda);
        let a = poly_at(self.functional.coeffs(), lambda);
        let c = poly_at(&self.c, lambda);
        let p_red = self.model.observed_weighted(lambda)?;
        let g_eff = self.model.noise_value(lambda)?;
        let middle = a * one_minus_exp_pow(lambda, mu, n) * (g_eff / p_red);
        Ok(b - middle - c / p_red)
    }

    /// Spectral characteristic `h_μ(λ) = κ(λ) G(λ)`.
    pub fn spectral_characteristic(&self, lambda: f64) -> Result<Complex64> {
        let spec = self.model.spec();
        Ok(inc_kernel(lambda, spec.mu(), spec.n()) * self.transfer(lambda)?)
    }

    fn compute_weights(&mut self, dim: usize) -> Result<()> {
        let spec = *self.model.spec();
        let zero_scale = self
            .bundle
            .b
            .iter()
            .chain(self.c.iter())
            .fold(0.0f64, |s, v| s.max(abs(*v)));
        if zero_scale == 0.0 {
            // zero functional: empty weight map
            return Ok(());
        }

        let grid_m = self.model.grid_len();
        let mut span = 16usize.max(2 * dim);
        let (weights, kmin, max_im) = loop {
            let kmin = -(span as i64);
            let kmax = (dim - 1) as i64 + span as i64;
            let eval = |l: f64| self.transfer(l);
            let (w, max_im) = match grid_m {
                Some(m) => {
                    let m_eff = m.max(4 * (kmax - kmin + 1) as usize).next_power_of_two();
                    quad::fourier_coeffs_two_sided(eval, kmin, kmax, m_eff)?
                }
                None => quad::fourier_coeffs_two_sided_adaptive(
                    eval,
                    kmin,
                    kmax,
                    &self.opts.quad,
                    zero_scale,
                )?,
            };
            // tail mass at the extreme three indices on each side
            let tail = w[..3.min(w.len())]
                .iter()
                .chain(w[w.len().saturating_sub(3)..].iter())
                .fold(0.0f64, |s, v| s.max(abs(*v)));
            if tail < self.opts.weight_tol {
                break (w, kmin, max_im);
            }
            if span >= self.opts.max_weight_span {
                return Err(Error::TruncationInsufficient { tail });
            }
            span = (span * 2).min(self.opts.max_weight_span);
        };

        if max_im > self.opts.imag_tol * (1.0 + zero_scale) {
            return Err(Error::QuadratureNotConverged { residual: max_im });
        }
        self.weight_imag_sup = max_im;

        // independent orthogonality check on the in-gap indices 0..=N+μn
        let mut orth_sup = 0.0f64;
        for k in 0..dim as i64 {
            let w = weights[(k - kmin) as usize];
            orth_sup = orth_sup.max(abs(w));
            if abs(w) > self.opts.orthogonality_tol {
                return Err(Error::OrthogonalityViolated {
                    index: k,
                    magnitude: abs(w),
                });
            }
        }
        self.orthogonality_sup = orth_sup;

        let keep = 1e-12 * (1.0 + weights.iter().fold(0.0f64, |s, v| s.max(abs(*v))));
        for (i, &w) in weights.iter().enumerate() {
            let k = kmin + i as i64;
            if (0..dim as i64).contains(&k) {
                continue; // in-gap coefficients are dropped (checked above)
            }
            if abs(w) > keep {
                self.increment_weights.insert(k, w);
            }
        }
        for k in -(spec.boundary_len() as i64)..0 {
            let v = self.bundle.v_at(k);
            if v != 0.0 {
                self.boundary_weights.insert(k, -v);
            }
        }
        Ok(())
    }

    /// Increment weights at an explicit truncation horizon: Fourier
    /// coefficients of `G` on `-K..=N+μn+K`. The in-gap coefficients must
    /// be below `tol` (orthogonality) and are dropped; the tail mass at
    /// the horizon must be below `tol` or the truncation is rejected.
    pub fn increment_weights_truncated(
        &self,
        k_span: usize,
        tol: f64,
    ) -> Result<BTreeMap<i64, f64>> {
        if k_span < 1 {
            return Err(Error::InvalidSpec("truncation horizon must be >= 1"));
        }
        let dim = self.model.spec().system_dim();
        let kmin = -(k_span as i64);
        let kmax = (dim - 1) as i64 + k_span as i64;
        let eval = |l: f64| self.transfer(l);
        let zero_scale = self
            .bundle
            .b
            .iter()
            .chain(self.c.iter())
            .fold(0.0f64, |s, v| s.max(abs(*v)));
        let (weights, _) = match self.model.grid_len() {
            Some(m) => {
                let m_eff = m.max(4 * (kmax - kmin + 1) as usize).next_power_of_two();
                quad::fourier_coeffs_two_sided(eval, kmin, kmax, m_eff)?
            }
            None => quad::fourier_coeffs_two_sided_adaptive(
                eval,
                kmin,
                kmax,
                &self.opts.quad,
                zero_scale,
            )?,
        };
        let tail = weights[..3.min(weights.len())]
            .iter()
            .chain(weights[weights.len().saturating_sub(3)..].iter())
            .fold(0.0f64, |s, v| s.max(abs(*v)));
        if tail >= tol {
            return Err(Error::TruncationInsufficient { tail });
        }
        let mut out = BTreeMap::new();
        for (i, &w) in weights.iter().enumerate() {
            let k = kmin + i as i64;
            if (0..dim as i64).contains(&k) {
                if abs(w) > tol {
                    return Err(Error::OrthogonalityViolated {
                        index: k,
                        magnitude: abs(w),
                    });
                }
                continue;
            }
            if abs(w) > 1e-13 * (1.0 + zero_scale) {
                out.insert(k, w);
            }
        }
        Ok(out)
    }

    /// Estimate value from a series: increment weights applied to observed
    /// increments plus the boundary term.
    pub fn estimate(&self, series: &ObservationSeries) -> Result<f64> {
        let spec = self.model.spec();
        let (n, mu) = (spec.n(), spec.mu());
        let mut acc = 0.0;
        for (&k, &w) in &self.increment_weights {
            let mut inc = 0.0;
            for l in 0..=n {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                inc += sign * binomial(n, l) as f64 * series.get(k - (l * mu) as i64)?;
            }
            acc += w * inc;
        }
        for (&k, &bw) in &self.boundary_weights {
            acc += bw * series.get(k)?;
        }
        Ok(acc)
    }

    /// Weights on the raw observations ζ(t): increments expanded through
    /// the signed binomial pattern, plus the boundary weights.
    pub fn time_domain_weights(&self) -> BTreeMap<i64, f64> {
        let spec = self.model.spec();
        let (n, mu) = (spec.n(), spec.mu());
        let mut raw: BTreeMap<i64, f64> = BTreeMap::new();
        for (&k, &w) in &self.increment_weights {
            for l in 0..=n {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                *raw.entry(k - (l * mu) as i64).or_insert(0.0) +=
                    sign * binomial(n, l) as f64 * w;
            }
        }
        for (&k, &bw) in &self.boundary_weights {
            *raw.entry(k).or_insert(0.0) += bw;
        }
        let scale = raw.values().fold(0.0f64, |s, v| s.max(abs(*v)));
        raw.retain(|_, v| abs(*v) > 1e-12 * (1.0 + scale));
        raw
    }

    /// Frequency-domain route for the mean-square error: the two spectral
    /// integrals evaluated by quadrature in reduced (singularity-free)
    /// form.
    pub fn mse_frequency(&self) -> Result<f64> {
        let spec = self.model.spec();
        let (n, mu) = (spec.n(), spec.mu());
        let beta2 = self.model.beta() * self.model.beta();
        let integrand = |l: f64| -> Result<f64> {
            let a = poly_at(self.functional.coeffs(), l);
            let c = poly_at(&self.c, l);
            let w_f = self.model.signal_weighted(l)?;
            let p_red = self.model.observed_weighted(l)?;
            let g_eff = self.model.noise_value(l)?;
            // |A β² w_f - (iλ)^n κ C|² g_eff / p_red²
            let u1 = a * (beta2 * w_f) - i_lambda_pow(l, n) * inc_kernel(l, mu, n) * c;
            let i1 = u1.norm_sqr() * g_eff / (p_red * p_red);
            // |A (1-e^{iλμ})^n [g_eff]₊ + C|² w_f / p_red²
            let u2 = a * one_minus_exp_pow(l, mu, n) * g_eff.max(0.0) + c;
            let i2 = u2.norm_sqr() * w_f / (p_red * p_red);
            Ok(i1 + i2)
        };
        let value = match self.model.grid_len() {
            Some(m) => quad::mean_fixed(integrand, m)?,
            None => quad::mean_adaptive(integrand, &self.opts.quad)?.value,
        };
        Ok(value)
    }

    /// Mean-square error with the dual-route consistency check: returns
    /// the quadratic form after verifying the frequency-integral route
    /// agrees within tolerance.
    pub fn mse_checked(&self) -> Result<f64> {
        let freq = self.mse_frequency()?;
        let gap = abs(freq - self.mse);
        if gap > self.opts.mse_check_tol * (1.0 + abs(self.mse)) {
            return Err(Error::MseRouteMismatch {
                quadratic: self.mse,
                integral: freq,
            });
        }
        Ok(self.mse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{ar1_increment_density, Density};

    const PI: f64 = core::f64::consts::PI;

    fn golden() -> (ObservationModel, FunctionalSpec) {
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let model = ObservationModel::noise_free(spec, ar1_increment_density(&spec, 0.5));
        let func = FunctionalSpec::new(&spec, vec![2.0, 1.0]).unwrap();
        (model, func)
    }

    #[test]
    fn golden_solution_coefficients() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        // c = F⁻¹ (3,1,0)ᵀ = (4/85)(53, -5, 2)
        let expect = [4.0 * 53.0 / 85.0, -4.0 * 5.0 / 85.0, 4.0 * 2.0 / 85.0];
        for (ci, ei) in sol.coefficients().iter().zip(&expect) {
            assert!((ci - ei).abs() < 1e-12, "{ci} vs {ei}");
        }
        assert!(sol.solve_residual() < 1e-12);
    }

    #[test]
    fn golden_increment_weights() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let w = sol.increment_weights();
        assert!((w[&-1] - (-106.0 / 85.0)).abs() < 1e-10);
        assert!((w[&3] - (-4.0 / 85.0)).abs() < 1e-10);
        for (&k, &wk) in w {
            if k != -1 && k != 3 {
                assert!(wk.abs() < 1e-10, "k={k} w={wk}");
            }
        }
        // boundary: -v(-1) = 3
        assert!((sol.boundary_weights()[&-1] - 3.0).abs() < 1e-12);
        assert!(sol.orthogonality_sup() < 1e-10);
    }

    #[test]
    fn golden_time_domain_weights() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let raw = sol.time_domain_weights();
        let cases = [
            (-2, 106.0 / 85.0),
            (-1, 149.0 / 85.0),
            (2, 4.0 / 85.0),
            (3, -4.0 / 85.0),
        ];
        assert_eq!(raw.len(), 4);
        for (t, expect) in cases {
            assert!((raw[&t] - expect).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn golden_mse_both_routes() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let expect = 616.0 / 85.0;
        assert!((sol.mse() - expect).abs() < 1e-10, "mse = {}", sol.mse());
        let freq = sol.mse_frequency().unwrap();
        assert!((freq - expect).abs() < 1e-8, "freq = {freq}");
        assert!((sol.mse_checked().unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn golden_estimate_on_series() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let series =
            ObservationSeries::new(model.spec(), [(-2, 1.0), (-1, 2.0), (2, 3.0), (3, 4.0)])
                .unwrap();
        let est = sol.estimate(&series).unwrap();
        assert!((est - 400.0 / 85.0).abs() < 1e-10, "est = {est}");
    }

    #[test]
    fn constant_series_is_interpolated_exactly() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let series = ObservationSeries::new(
            model.spec(),
            (-10..=10).filter(|t| *t < 0 || *t > 1).map(|t| (t, 1.0)),
        )
        .unwrap();
        // increments of a constant vanish; -Σ v(k) = Σ a(k) = 3
        let est = sol.estimate(&series).unwrap();
        assert!((est - 3.0).abs() < 1e-9, "est = {est}");
    }

    #[test]
    fn golden_spectral_characteristic_at_pi() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        // G(π) = -(106/85)e^{-iπ} - (4/85)e^{3iπ} = 110/85
        let g = sol.transfer(PI * (1.0 - 1e-15)).unwrap();
        assert!((g.re - 110.0 / 85.0).abs() < 1e-9, "{g}");
        assert!(g.im.abs() < 1e-9);
        let h = sol.spectral_characteristic(PI * (1.0 - 1e-15)).unwrap();
        let k = inc_kernel(PI * (1.0 - 1e-15), 1, 1);
        assert!((h - k * g).norm() < 1e-12);
    }

    #[test]
    fn zero_functional_gives_zero_everything() {
        let (model, _) = golden();
        let spec = *model.spec();
        let func = FunctionalSpec::new(&spec, vec![0.0, 0.0]).unwrap();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        assert!(sol.coefficients().iter().all(|&c| c == 0.0));
        assert_eq!(sol.mse(), 0.0);
        assert!(sol.increment_weights().is_empty());
    }

    #[test]
    fn noise_middle_term_vanishes_when_g_zero() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        // with g ≡ 0, G = B - C/ψ exactly; cross-check at a few points
        for &l in &[0.3, 1.1, 2.5] {
            let b = poly_at(&sol.bundle.b, l);
            let c = poly_at(sol.coefficients(), l);
            let psi = model.observed_weighted(l).unwrap();
            let expect = b - c / psi;
            assert!((sol.transfer(l).unwrap() - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn point_estimate_matches_indicator_functional() {
        let (model, _) = golden();
        let spec = *model.spec();
        let opts = SolveOptions::default();
        for p in 0..=1usize {
            let via_point = solve_point(&model, p, &opts).unwrap();
            let func = FunctionalSpec::point(&spec, p).unwrap();
            let via_solve = solve(&model, &func, &opts).unwrap();
            assert!(
                (via_point.mse() - via_solve.mse()).abs() < 1e-12,
                "p={p}: {} vs {}",
                via_point.mse(),
                via_solve.mse()
            );
            for (cp, cs) in via_point
                .coefficients()
                .iter()
                .zip(via_solve.coefficients())
            {
                assert!((cp - cs).abs() < 1e-12);
            }
            let series = ObservationSeries::new(
                &spec,
                (-10..=10)
                    .filter(|t| *t < 0 || *t > 1)
                    .map(|t| (t, crate::math::sin(t as f64 * 0.7))),
            )
            .unwrap();
            let ep = via_point.estimate(&series).unwrap();
            let es = via_solve.estimate(&series).unwrap();
            assert!((ep - es).abs() < 1e-12);
        }
    }

    #[test]
    fn point_estimate_matches_indicator_with_noise() {
        // with noise the sparse column-selected T_p actually contributes
        let spec = IncrementSpec::new(2, 1, 2).unwrap();
        let f = ar1_increment_density(&spec, 0.4);
        let g = Density::rational_from_factors(&[0.7, -0.2], &[1.0, 0.1]).unwrap();
        let model = ObservationModel::with_noise(spec, f, g);
        let opts = SolveOptions::default();
        for p in 0..=2usize {
            let via_point = solve_point(&model, p, &opts).unwrap();
            let func = FunctionalSpec::point(&spec, p).unwrap();
            let via_solve = solve(&model, &func, &opts).unwrap();
            assert!(
                (via_point.mse() - via_solve.mse()).abs() < 1e-11,
                "p={p}: {} vs {}",
                via_point.mse(),
                via_solve.mse()
            );
            for (cp, cs) in via_point
                .coefficients()
                .iter()
                .zip(via_solve.coefficients())
            {
                assert!((cp - cs).abs() < 1e-11, "p={p}");
            }
        }
    }

    #[test]
    fn golden_point_zero_mse() {
        // mse(ξ̂(0)) = ⟨F⁻¹ d, d⟩ with d = (1,0,0): 84/85
        let (model, _) = golden();
        let sol = solve_point(&model, 0, &SolveOptions::default()).unwrap();
        assert!(
            (sol.mse() - 84.0 / 85.0).abs() < 1e-12,
            "mse = {}",
            sol.mse()
        );
    }

    #[test]
    fn weights_decay_geometrically_for_slow_pole() {
        // MA(1) increments: 1/ψ has a true pole at radius 0.9, so the
        // transfer function has an infinite geometric tail (the AR case
        // collapses to finite support instead)
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = Density::increment_rational_from_factors(&spec, &[1.0, 0.9], &[1.0]).unwrap();
        let model = ObservationModel::noise_free(spec, f);
        let func = FunctionalSpec::new(&spec, vec![2.0, 1.0]).unwrap();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        // |w(k)| ≤ C·0.9^{|k|} with a generous constant
        let w = sol.increment_weights();
        let cbound = 50.0;
        for (&k, &wk) in w {
            let dist = if k < 0 { (-k) as u32 } else { (k - 3) as u32 + 1 };
            assert!(
                wk.abs() <= cbound * crate::math::powi(0.9, dist),
                "k={k} w={wk}"
            );
        }
        // and the slow pole really does produce a long tail
        assert!(w.keys().any(|&k| k < -20));
    }

    #[test]
    fn explicit_truncation_weights_match_adaptive_ones() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let w = sol.increment_weights_truncated(8, 1e-8).unwrap();
        assert!((w[&-1] + 106.0 / 85.0).abs() < 1e-10);
        assert!((w[&3] + 4.0 / 85.0).abs() < 1e-10);
        // a horizon too small for the tolerance is rejected, not silently
        // truncated: the MA-free golden case has finite support, so force
        // a long-tail model instead
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let slow =
            Density::increment_rational_from_factors(&spec, &[1.0, 0.9], &[1.0]).unwrap();
        let slow_sol = solve(
            &ObservationModel::noise_free(spec, slow),
            &func,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(matches!(
            slow_sol.increment_weights_truncated(5, 1e-8),
            Err(Error::TruncationInsufficient { .. })
        ));
    }

    #[test]
    fn noisy_model_solves_and_checks() {
        let spec = IncrementSpec::new(1, 1, 2).unwrap();
        let f = ar1_increment_density(&spec, 0.4);
        let g = Density::rational_from_factors(&[0.5, 0.1], &[1.0]).unwrap();
        let model = ObservationModel::with_noise(spec, f, g);
        let func = FunctionalSpec::new(&spec, vec![1.0, -1.0, 2.0]).unwrap();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        assert!(sol.mse() > 0.0);
        sol.mse_checked().unwrap();
        assert!(sol.orthogonality_sup() < 1e-8);
    }

    #[test]
    fn cointegrated_beta_one_equals_standard() {
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let g = Density::rational_from_factors(&[0.6, 0.2], &[1.0]).unwrap();
        let p = Density::composite(f.clone(), g.clone(), 1);
        let func = FunctionalSpec::new(&spec, vec![2.0, 1.0]).unwrap();
        let opts = SolveOptions::default();
        let standard =
            solve(&ObservationModel::with_noise(spec, f.clone(), g), &func, &opts).unwrap();
        let coint = solve(
            &ObservationModel::cointegrated(spec, f, p, 1.0).unwrap(),
            &func,
            &opts,
        )
        .unwrap();
        assert!((standard.mse() - coint.mse()).abs() < 1e-10);
        for (cs, cc) in standard.coefficients().iter().zip(coint.coefficients()) {
            assert!((cs - cc).abs() < 1e-10);
        }
        for (&k, &ws) in standard.increment_weights() {
            let wc = coint.increment_weights().get(&k).copied().unwrap_or(0.0);
            assert!((ws - wc).abs() < 1e-8, "k={k}: {ws} vs {wc}");
        }
    }

    #[test]
    fn cointegrated_zero_remainder_reduces_to_noise_free_solution() {
        // p = f with β = 1: the pair solve reproduces the noise-free
        // worked solution exactly
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let model = ObservationModel::cointegrated(spec, f.clone(), f, 1.0).unwrap();
        let func = FunctionalSpec::new(&spec, vec![2.0, 1.0]).unwrap();
        let sol = solve_cointegrated(&model, &func, &SolveOptions::default()).unwrap();
        assert!((sol.mse() - 616.0 / 85.0).abs() < 1e-10, "mse = {}", sol.mse());
        let expect = [4.0 * 53.0 / 85.0, -4.0 * 5.0 / 85.0, 4.0 * 2.0 / 85.0];
        for (ci, ei) in sol.coefficients().iter().zip(&expect) {
            assert!((ci - ei).abs() < 1e-10);
        }
        let w = sol.increment_weights();
        assert!((w[&-1] + 106.0 / 85.0).abs() < 1e-9);
        assert!((w[&3] + 4.0 / 85.0).abs() < 1e-9);
    }

    #[test]
    fn cointegrated_pure_scaling() {
        // p = β²f: c = P⁻¹ rhs and mse = ⟨P⁻¹ rhs, rhs⟩ with T = Q = 0
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let beta = 2.0;
        let p = Density::scaled(beta * beta, f.clone()).unwrap();
        let model = ObservationModel::cointegrated(spec, f, p, beta).unwrap();
        let func = FunctionalSpec::new(&spec, vec![2.0, 1.0]).unwrap();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        // P = F/β², so c = β²F⁻¹rhs and mse = β²·616/85
        let expect_mse = beta * beta * 616.0 / 85.0;
        assert!(
            (sol.mse() - expect_mse).abs() < 1e-9 * expect_mse,
            "mse = {}",
            sol.mse()
        );
    }

    #[test]
    fn series_validation_rejects_gap_points() {
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        assert!(ObservationSeries::new(&spec, [(0, 1.0)]).is_err());
        assert!(ObservationSeries::new(&spec, [(-1, 1.0), (2, 0.0)]).is_ok());
    }

    #[test]
    fn missing_observation_reported() {
        let (model, func) = golden();
        let sol = solve(&model, &func, &SolveOptions::default()).unwrap();
        let series =
            ObservationSeries::new(model.spec(), [(-2, 1.0), (-1, 2.0), (2, 3.0)]).unwrap();
        assert!(matches!(
            sol.estimate(&series),
            Err(Error::MissingObservation { t: 3 })
        ));
    }
}
