//! Assembly of the Hermitian Toeplitz matrix set from Fourier coefficients
//! of reduced density ratios.
//!
//! With `p_red = |κ|² p` (the weighted observed density), the three
//! generating functions are
//!
//! - `P` from `1 / p_red`,
//! - `T` from `g_eff / p_red`,
//! - `Q` from `w_f · [g_eff]₊ / p_red`,
//!
//! where `g_eff` is the stationary noise density, or the stationary
//! remainder `λ^{-2n}(p - β²f)` in the cointegrated case (this unifies the
//! standard matrices, the noise-free `F`, and the `β`-variants: the
//! positive part only ever bites in the cointegrated case). Densities are
//! even, so every matrix is real symmetric Toeplitz and is stored as its
//! generating coefficient vector.
//!
//! When the reduced ratio is available in exact trig-polynomial form and
//! the denominator collapses to a constant, the coefficients come from
//! polynomial algebra with no quadrature at all; otherwise a grid-doubling
//! (or density-grid-matched) quadrature is used.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::SymMat;
use crate::quad::{self, QuadOpts};
use crate::spectral::{MinimalityCheck, ObservationModel, SymRatio};
use crate::Result;

/// Which model family the matrices were built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixVariant {
    Standard,
    /// `g ≡ 0`; `P` coincides with the noise-free matrix `F`, `T = Q = 0`.
    NoiseFree,
    Cointegrated { beta: f64 },
}

/// The matrices `P`, `T` (dimension `(N+μn+1)²`) and `Q` (`(N+1)²`),
/// stored as generating Fourier coefficient vectors; dense materialization
/// on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierMatrixSet {
    p_coeffs: Vec<f64>,
    t_coeffs: Vec<f64>,
    q_coeffs: Vec<f64>,
    dim: usize,
    q_dim: usize,
    variant: MatrixVariant,
    minimality: MinimalityCheck,
}

impl FourierMatrixSet {
    pub fn variant(&self) -> MatrixVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_coeffs(&self) -> &[f64] {
        &self.p_coeffs
    }

    pub fn t_coeffs(&self) -> &[f64] {
        &self.t_coeffs
    }

    pub fn q_coeffs(&self) -> &[f64] {
        &self.q_coeffs
    }

    pub fn minimality(&self) -> &MinimalityCheck {
        &self.minimality
    }

    pub fn p_matrix(&self) -> SymMat {
        SymMat::from_toeplitz(&self.p_coeffs, self.dim)
    }

    pub fn t_matrix(&self) -> SymMat {
        SymMat::from_toeplitz(&self.t_coeffs, self.dim)
    }

    pub fn q_matrix(&self) -> SymMat {
        SymMat::from_toeplitz(&self.q_coeffs, self.q_dim)
    }

    /// `T a_μ` without materializing the matrix.
    pub fn t_apply(&self, a_mu: &[f64]) -> Vec<f64> {
        debug_assert_eq!(a_mu.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (l, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (m, &am) in a_mu.iter().enumerate() {
                acc += self.t_coeffs[m.abs_diff(l)] * am;
            }
            *slot = acc;
        }
        out
    }

    /// `⟨Q a, a⟩` over the functional coefficients.
    pub fn q_quadratic_form(&self, a: &[f64]) -> f64 {
        debug_assert!(a.len() <= self.q_dim);
        let mut acc = 0.0;
        for (l, &al) in a.iter().enumerate() {
            for (k, &ak) in a.iter().enumerate() {
                acc += al * ak * self.q_coeffs[k.abs_diff(l)];
            }
        }
        acc
    }
}

/// Fourier coefficients `c(k) = (1/2π)∫ e^{-iλk} w(λ) dλ, k = 0..=kmax` of
/// a real even integrand; `c(-k) = c(k)`. Grid-doubling until stable.
pub fn fourier_coefficients<W>(w: W, kmax: usize, opts: &QuadOpts) -> Result<Vec<f64>>
where
    W: Fn(f64) -> Result<f64>,
{
    quad::fourier_coeffs_adaptive(w, kmax, opts, 0.0)
}

/// Matrices for a signal-plus-noise (or noise-free) model.
pub fn build_standard(model: &ObservationModel, opts: &QuadOpts) -> Result<FourierMatrixSet> {
    if model.is_cointegrated() {
        return Err(crate::error::Error::InvalidSpec(
            "build_standard expects a signal-plus-noise model",
        ));
    }
    build(model, opts)
}

/// The β-variant matrices for a cointegrated pair.
pub fn build_cointegrated(
    model: &ObservationModel,
    opts: &QuadOpts,
) -> Result<FourierMatrixSet> {
    if !model.is_cointegrated() {
        return Err(crate::error::Error::InvalidSpec(
            "build_cointegrated expects a cointegrated model",
        ));
    }
    build(model, opts)
}

/// Build the matrix set for any observation model. Checks minimality
/// first and verifies that `P` is positive definite.
pub fn build(model: &ObservationModel, opts: &QuadOpts) -> Result<FourierMatrixSet> {
    let minimality = model.require_minimality(opts)?;
    let spec = *model.spec();
    let dim = spec.system_dim();
    let q_dim = spec.functional_len();
    let kmax = dim - 1;

    let noise_free = !model.is_cointegrated() && model.g().is_zero();
    let variant = if model.is_cointegrated() {
        MatrixVariant::Cointegrated { beta: model.beta() }
    } else if noise_free {
        MatrixVariant::NoiseFree
    } else {
        MatrixVariant::Standard
    };

    // exact path pieces, when representable
    let p_red_sym = model.observed_weighted_sym();
    let g_sym = if model.is_cointegrated() {
        None // the remainder is evaluated pointwise
    } else {
        model.g().plain_sym()
    };
    let wf_sym = model.f().weighted_sym(&spec);

    let p_coeffs = extract(
        p_red_sym.as_ref().map(SymRatio::recip),
        |l| model.observed_weighted(l).map(|p| 1.0 / p),
        kmax,
        model,
        opts,
        0.0,
    )?;
    // natural magnitude of every matrix integrand: T and Q that vanish at
    // this scale are genuinely zero for the solve
    let floor = p_coeffs[0];

    let (t_coeffs, q_coeffs) = if noise_free {
        (vec![0.0; dim], vec![0.0; q_dim])
    } else {
        let t_exact = match (&g_sym, &p_red_sym) {
            (Some(g), Some(p)) => Some(g.mul(&p.recip())),
            _ => None,
        };
        let t_coeffs = extract(
            t_exact,
            |l| Ok(model.noise_value(l)? / model.observed_weighted(l)?),
            kmax,
            model,
            opts,
            floor,
        )?;
        let q_exact = match (&wf_sym, &g_sym, &p_red_sym, model.is_cointegrated()) {
            (Some(wf), Some(g), Some(p), false) => Some(wf.mul(g).mul(&p.recip())),
            _ => None,
        };
        let q_coeffs = extract(
            q_exact,
            |l| {
                let g_pos = model.noise_value(l)?.max(0.0);
                Ok(model.signal_weighted(l)? * g_pos / model.observed_weighted(l)?)
            },
            q_dim - 1,
            model,
            opts,
            floor,
        )?;
        (t_coeffs, q_coeffs)
    };

    let set = FourierMatrixSet {
        p_coeffs,
        t_coeffs,
        q_coeffs,
        dim,
        q_dim,
        variant,
        minimality,
    };

    // P must be positive definite whenever minimality holds; failure here
    // signals quadrature breakdown rather than a bad model.
    set.p_matrix().cholesky()?;

    Ok(set)
}

/// Coefficient extraction: exact polynomial algebra when the ratio's
/// denominator is constant, otherwise quadrature (matched to the density
/// grid when one is present).
fn extract<W>(
    exact: Option<SymRatio>,
    w: W,
    kmax: usize,
    model: &ObservationModel,
    opts: &QuadOpts,
    zero_floor: f64,
) -> Result<Vec<f64>>
where
    W: Fn(f64) -> Result<f64>,
{
    if let Some(ratio) = exact {
        if let Some(poly) = ratio.as_poly() {
            let mut out = vec![0.0; kmax + 1];
            for (k, slot) in out.iter_mut().enumerate() {
                *slot = poly.coeffs().get(k).copied().unwrap_or(0.0);
            }
            return Ok(out);
        }
    }
    match model.grid_len() {
        Some(m) => quad::fourier_coeffs_fixed(w, kmax, m.max(4 * (kmax + 1)).next_power_of_two()),
        None => quad::fourier_coeffs_adaptive(w, kmax, opts, zero_floor),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::increments::IncrementSpec;
    use crate::spectral::{ar1_increment_density, Density};

    fn golden_model() -> ObservationModel {
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        ObservationModel::noise_free(spec, ar1_increment_density(&spec, 0.5))
    }

    #[test]
    fn golden_f_matrix_is_exact() {
        let set = build(&golden_model(), &QuadOpts::default()).unwrap();
        assert_eq!(set.variant(), MatrixVariant::NoiseFree);
        // F = (1/4) [[5,2,0],[2,5,2],[0,2,5]]
        assert_eq!(set.p_coeffs()[0], 1.25);
        assert_eq!(set.p_coeffs()[1], 0.5);
        assert_eq!(set.p_coeffs()[2], 0.0);
        let f = set.p_matrix();
        for (l, k, v) in [
            (0, 0, 1.25),
            (0, 1, 0.5),
            (0, 2, 0.0),
            (1, 1, 1.25),
            (2, 1, 0.5),
        ] {
            assert_eq!(f.at(l, k), v);
        }
        // T and Q vanish without noise
        assert!(set.t_coeffs().iter().all(|&x| x == 0.0));
        assert!(set.q_coeffs().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn golden_f_inverse_matches_printed_values() {
        let set = build(&golden_model(), &QuadOpts::default()).unwrap();
        let f = set.p_matrix();
        let expect = [
            [21.0, -10.0, 4.0],
            [-10.0, 25.0, -10.0],
            [4.0, -10.0, 21.0],
        ];
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            let (col, _) = f.solve_refined(&e).unwrap();
            for i in 0..3 {
                assert!(
                    (col[i] - expect[i][j] * 4.0 / 85.0).abs() < 1e-13,
                    "({i},{j})"
                );
            }
        }
    }

    #[test]
    fn quadrature_path_agrees_with_exact_path() {
        // same golden model but with the density hidden behind a grid, so
        // the closed-form route is unavailable
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let grid = Density::grid(
            (0..8192)
                .map(|j| f.eval(quad::node(j, 8192)).unwrap())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let exact = build(&golden_model(), &QuadOpts::default()).unwrap();
        let sampled = build(
            &ObservationModel::noise_free(spec, grid),
            &QuadOpts::default(),
        )
        .unwrap();
        for k in 0..3 {
            // grid interpolation limits the match, not the quadrature
            assert!(
                (exact.p_coeffs()[k] - sampled.p_coeffs()[k]).abs() < 1e-5,
                "k={k}: {} vs {}",
                exact.p_coeffs()[k],
                sampled.p_coeffs()[k]
            );
        }
    }

    #[test]
    fn rational_noise_model_consistency() {
        // with noise, entry (0,0) of P equals the minimality integral /2π
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let g = Density::rational_from_factors(&[0.6, 0.2], &[1.0]).unwrap();
        let model = ObservationModel::with_noise(spec, f, g);
        let set = build(&model, &QuadOpts::default()).unwrap();
        let integral = set.minimality().integral.unwrap();
        assert!(
            (set.p_coeffs()[0] - integral / (2.0 * core::f64::consts::PI)).abs() < 1e-9,
            "P00 = {}, ∫r/2π = {}",
            set.p_coeffs()[0],
            integral / (2.0 * core::f64::consts::PI)
        );
        // P positive definite with a real margin
        let eigs = set.p_matrix().eigenvalues();
        assert!(eigs[0] > 1e-10 * set.p_matrix().trace());
    }

    #[test]
    fn cointegrated_beta_one_reduces_to_standard() {
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let g = Density::rational_from_factors(&[0.6, 0.2], &[1.0]).unwrap();
        let p = Density::composite(f.clone(), g.clone(), 1);
        let standard = build(
            &ObservationModel::with_noise(spec, f.clone(), g),
            &QuadOpts::default(),
        )
        .unwrap();
        let coint = build(
            &ObservationModel::cointegrated(spec, f, p, 1.0).unwrap(),
            &QuadOpts::default(),
        )
        .unwrap();
        for k in 0..3 {
            assert!(
                (standard.p_coeffs()[k] - coint.p_coeffs()[k]).abs() < 1e-10,
                "P k={k}"
            );
            assert!(
                (standard.t_coeffs()[k] - coint.t_coeffs()[k]).abs() < 1e-10,
                "T k={k}"
            );
        }
        for k in 0..2 {
            assert!(
                (standard.q_coeffs()[k] - coint.q_coeffs()[k]).abs() < 1e-10,
                "Q k={k}"
            );
        }
    }

    #[test]
    fn cointegrated_pure_scaling_kills_t_and_q() {
        // p = β² f exactly: remainder vanishes, so T = 0 and Q = 0
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let beta = 1.7;
        let p = Density::scaled(beta * beta, f.clone()).unwrap();
        let set = build(
            &ObservationModel::cointegrated(spec, f, p, beta).unwrap(),
            &QuadOpts::default(),
        )
        .unwrap();
        assert!(set.t_coeffs().iter().all(|&x| x.abs() < 1e-12));
        assert!(set.q_coeffs().iter().all(|&x| x.abs() < 1e-12));
        // and P is the golden F divided by β²
        assert!((set.p_coeffs()[0] - 1.25 / (beta * beta)).abs() < 1e-11);
    }

    #[test]
    fn cointegrated_beta_one_noise_free_reduction() {
        // p = f (β = 1, zero stationary remainder): P^{μ,β} equals F
        let spec = IncrementSpec::new(1, 1, 1).unwrap();
        let f = ar1_increment_density(&spec, 0.5);
        let set = build(
            &ObservationModel::cointegrated(spec, f.clone(), f, 1.0).unwrap(),
            &QuadOpts::default(),
        )
        .unwrap();
        assert!((set.p_coeffs()[0] - 1.25).abs() < 1e-12);
        assert!((set.p_coeffs()[1] - 0.5).abs() < 1e-12);
        assert!(set.p_coeffs()[2].abs() < 1e-12);
    }
}
