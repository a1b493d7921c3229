//! Least-favorable spectral densities and minimax-robust verification.
//!
//! Two admissible classes are implemented, each in a standard and a
//! cointegrated flavor:
//!
//! - lower reciprocal-integral bounds: `(1/2π)∫ dλ/f ≥ P₁` and
//!   `(1/2π)∫ dλ/g ≥ P₂` (observed-density analogue in the cointegrated
//!   case);
//! - ε-neighborhoods: an L² ball of radius ε₁ around a reference signal
//!   density and an L¹ ball of radius ε₂ around a reference noise (or
//!   observed) density.
//!
//! The optimality conditions are pointwise algebraic relations coupling
//! the pair to the solution coefficients `C⁰` computed at the pair, plus
//! integral constraints with multipliers α₁, α₂ subject to complementary
//! slackness. There is no closed-form solution in general; the solver runs
//! a damped alternating fixed point: solve at the current pair, update the
//! free densities pointwise from the relations with frozen `C⁰`, restore
//! the integral constraints by monotone bracketing of the multipliers,
//! damp, and reject any step that decreases the objective. Convergence is
//! decided by the residual sup-norms of the relations and constraints;
//! diagnostics are returned either way.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::fourier;
use crate::increments::{FunctionalSpec, IncrementSpec};
use crate::interpolate::{self, InterpolationSolution, SolveOptions};
use crate::linalg::dot;
use crate::math::{abs, i_lambda_pow, inc_kernel, kappa2, one_minus_exp_pow, poly_at, powi, sqrt, SplitMix64};
use crate::quad;
use crate::spectral::{Density, ObservationModel};
use crate::Result;

/// Numeric options for the least-favorable solvers.
#[derive(Debug, Clone, Copy)]
pub struct MinimaxOptions {
    /// Grid resolution (power of two, ≥ 512).
    pub grid: usize,
    /// Residual tolerance deciding convergence.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Damping factor θ ∈ (0, 1].
    pub damping: f64,
    /// Pointwise lower clamp keeping candidate densities minimal.
    pub density_floor: f64,
    /// Pointwise upper clamp where the relations ask for an unbounded
    /// density; hitting it flags the run as boundary-active.
    pub density_ceiling: f64,
    pub solve: SolveOptions,
}

impl Default for MinimaxOptions {
    fn default() -> Self {
        let solve = SolveOptions {
            compute_weights: false,
            ..SolveOptions::default()
        };
        Self {
            grid: 1024,
            tol: 1e-6,
            max_iter: 500,
            damping: 0.5,
            density_floor: 1e-8,
            density_ceiling: 1e8,
            solve,
        }
    }
}

/// Which of the two densities is known exactly (and therefore fixed).
#[derive(Debug, Clone)]
pub enum Fixity {
    BothFree,
    /// Signal density known: only the noise (or observed) side varies.
    SignalKnown(Density),
    /// Noise density known: only the signal side varies.
    NoiseKnown(Density),
}

/// Admissible class of spectral density pairs.
#[derive(Debug, Clone)]
pub enum ClassKind {
    /// `(1/2π)∫ dλ/f ≥ p1`, `(1/2π)∫ dλ/g ≥ p2`.
    LowerReciprocal { p1: f64, p2: f64 },
    /// `(1/2π)∫ (f-f_ref)² dλ ≤ eps1` (L²) and
    /// `(1/2π)∫ |g-g_ref| dλ ≤ eps2` (L¹).
    EpsNeighborhood {
        f_ref: Density,
        eps1: f64,
        g_ref: Density,
        eps2: f64,
    },
}

#[derive(Debug, Clone)]
pub struct DensityClass {
    pub kind: ClassKind,
    pub fixity: Fixity,
}

impl DensityClass {
    fn validate(&self) -> Result<()> {
        match &self.kind {
            ClassKind::LowerReciprocal { p1, p2 } => {
                if !p1.is_finite() || !p2.is_finite() || *p1 <= 0.0 || *p2 <= 0.0 {
                    return Err(Error::ConstraintInfeasible(String::from(
                        "reciprocal-integral bounds must be positive",
                    )));
                }
            }
            ClassKind::EpsNeighborhood { eps1, eps2, .. } => {
                if !eps1.is_finite() || !eps2.is_finite() || *eps1 <= 0.0 || *eps2 <= 0.0 {
                    return Err(Error::ConstraintInfeasible(String::from(
                        "eps-neighborhood radii must be positive",
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-relation residual sup-norms (relative) at the returned pair.
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualReport {
    /// Pointwise relation tied to the signal side.
    pub relation_f: f64,
    /// Pointwise relation tied to the noise/observed side.
    pub relation_g: f64,
    /// Integral constraint residual, signal side.
    pub constraint_f: f64,
    /// Integral constraint residual, noise/observed side.
    pub constraint_g: f64,
}

impl ResidualReport {
    pub fn sup(&self) -> f64 {
        self.relation_f
            .max(self.relation_g)
            .max(self.constraint_f)
            .max(self.constraint_g)
    }
}

/// Output of the least-favorable solvers.
#[derive(Debug, Clone)]
pub struct LeastFavorablePair {
    /// Least favorable signal density (grid form).
    pub f0: Density,
    /// Least favorable noise density — or observed density in the
    /// cointegrated case (grid form).
    pub g0: Density,
    pub cointegrated: bool,
    pub beta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Grid function |γ| ≤ 1 (ε-classes; empty for reciprocal classes).
    pub gamma: Vec<f64>,
    pub residuals: ResidualReport,
    /// Solution of the interpolation problem at the pair; its spectral
    /// characteristic is the minimax-robust characteristic.
    pub robust_solution: InterpolationSolution,
    pub iterations: usize,
    pub converged: bool,
    /// A density clamp (floor or ceiling) is active at the fixed point.
    pub boundary_active: bool,
    /// Grid sup of the two h-functions (boundedness premise, reported).
    pub h_sup: (f64, f64),
    /// Objective Δ(f0, g0) (mean-square error at the pair).
    pub objective: f64,
    spec: IncrementSpec,
    functional: FunctionalSpec,
    opts: MinimaxOptions,
}

/// Saddle-point verification report.
#[derive(Debug, Clone)]
pub struct SaddleReport {
    pub samples: usize,
    /// Δ(h⁰; f⁰, g⁰) evaluated by the frozen-characteristic quadrature.
    pub delta_at_pair: f64,
    /// Largest Δ(h⁰; f, g) - Δ(h⁰; f⁰, g⁰) over sampled perturbations.
    pub max_violation: f64,
    /// Number of samples violating the saddle inequality beyond tol.
    pub violations: usize,
    /// Residual sup of the pair's optimality relations, recomputed with
    /// the pair's stored multipliers.
    pub residual_sup: f64,
    /// Samples whose perturbed model failed the minimality condition.
    pub membership_failures: usize,
}

// ---------------------------------------------------------------------
// grid context and per-iteration state

struct GridCtx {
    spec: IncrementSpec,
    functional: FunctionalSpec,
    m: usize,
    nodes: Vec<f64>,
    /// A(e^{iλ}) at nodes.
    a_vals: Vec<Complex64>,
    /// (1-e^{iλμ})^n at nodes.
    omep: Vec<Complex64>,
    /// A·conj(κ) at nodes.
    a_kconj: Vec<Complex64>,
    /// (iλ)^n at nodes.
    ilp: Vec<Complex64>,
    /// √(|κ|²) at nodes.
    sqrt_kappa2: Vec<f64>,
    /// λ^{2n} at nodes.
    l2n: Vec<f64>,
}

impl GridCtx {
    fn new(spec: IncrementSpec, functional: &FunctionalSpec, m: usize) -> Self {
        let (n, mu) = (spec.n(), spec.mu());
        let nodes: Vec<f64> = (0..m).map(|j| quad::node(j, m)).collect();
        let a_vals: Vec<Complex64> = nodes
            .iter()
            .map(|&l| poly_at(functional.coeffs(), l))
            .collect();
        let omep: Vec<Complex64> = nodes
            .iter()
            .map(|&l| one_minus_exp_pow(l, mu, n))
            .collect();
        let a_kconj: Vec<Complex64> = nodes
            .iter()
            .zip(&a_vals)
            .map(|(&l, &a)| a * inc_kernel(l, mu, n).conj())
            .collect();
        let ilp: Vec<Complex64> = nodes.iter().map(|&l| i_lambda_pow(l, n)).collect();
        let sqrt_kappa2: Vec<f64> = nodes.iter().map(|&l| sqrt(kappa2(l, mu, n))).collect();
        let l2n: Vec<f64> = nodes
            .iter()
            .map(|&l| powi(l * l, n as u32))
            .collect();
        Self {
            spec,
            functional: functional.clone(),
            m,
            nodes,
            a_vals,
            omep,
            a_kconj,
            ilp,
            sqrt_kappa2,
            l2n,
        }
    }

    fn mean(&self, values: impl Iterator<Item = f64>) -> f64 {
        values.sum::<f64>() / self.m as f64
    }

    /// `h_{μ,f}(λ) = |A(1-e^{iλμ})^n g + C| / (√|κ|² · p)` at every node.
    fn h_f(&self, c: &[f64], g: &[f64], p: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|j| {
                let cval = poly_at(c, self.nodes[j]);
                (self.a_vals[j] * self.omep[j] * g[j] + cval).norm()
                    / (self.sqrt_kappa2[j] * p[j])
            })
            .collect()
    }

    /// `h_{μ,g}(λ) = |A·conj(κ)·f - (iλ)^n C| / (√|κ|² · p)` at every node.
    fn h_g(&self, c: &[f64], f: &[f64], p: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|j| {
                let cval = poly_at(c, self.nodes[j]);
                (self.a_kconj[j] * f[j] - self.ilp[j] * cval).norm()
                    / (self.sqrt_kappa2[j] * p[j])
            })
            .collect()
    }

    /// Cointegrated p-relation magnitude
    /// `|β²A·conj(κ)·f - (iλ)^n C| / (√|κ|² · p)`.
    fn h_p_coint(&self, c: &[f64], f: &[f64], p: &[f64], beta2: f64) -> Vec<f64> {
        (0..self.m)
            .map(|j| {
                let cval = poly_at(c, self.nodes[j]);
                (self.a_kconj[j] * (beta2 * f[j]) - self.ilp[j] * cval).norm()
                    / (self.sqrt_kappa2[j] * p[j])
            })
            .collect()
    }

    /// Cointegrated f-relation magnitude
    /// `|A(1-e^{iλμ})^n [g_r]₊ + C| / (√|κ|² · p)` with the stationary
    /// remainder `g_r = (p - β²f)/λ^{2n}`.
    fn h_fq_coint(&self, c: &[f64], f: &[f64], p: &[f64], beta2: f64) -> Vec<f64> {
        (0..self.m)
            .map(|j| {
                let gr = ((p[j] - beta2 * f[j]) / self.l2n[j]).max(0.0);
                let cval = poly_at(c, self.nodes[j]);
                (self.a_vals[j] * self.omep[j] * gr + cval).norm()
                    / (self.sqrt_kappa2[j] * p[j])
            })
            .collect()
    }
}

#[derive(Clone)]
struct State {
    f: Vec<f64>,
    g: Vec<f64>, // p in the cointegrated case
    alpha1: f64,
    alpha2: f64,
}

struct Problem<'a> {
    ctx: GridCtx,
    class: &'a DensityClass,
    cointegrated: bool,
    beta: f64,
    opts: MinimaxOptions,
    /// Fixed-side densities kept in their original representation.
    f_fixed: Option<Density>,
    g_fixed: Option<Density>,
    /// References sampled on the grid (ε-classes).
    f_ref: Vec<f64>,
    g_ref: Vec<f64>,
}

impl Problem<'_> {
    fn model(&self, state: &State) -> Result<ObservationModel> {
        let f_density = match &self.f_fixed {
            Some(d) => d.clone(),
            None => Density::grid(state.f.clone())?,
        };
        let g_density = match &self.g_fixed {
            Some(d) => d.clone(),
            None => Density::grid(state.g.clone())?,
        };
        if self.cointegrated {
            ObservationModel::cointegrated(self.ctx.spec, f_density, g_density, self.beta)
        } else {
            Ok(ObservationModel::with_noise(
                self.ctx.spec,
                f_density,
                g_density,
            ))
        }
    }

    /// Solve at the state without weight extraction; returns (c, mse).
    fn light_solve(&self, state: &State) -> Result<(Vec<f64>, f64)> {
        let model = self.model(state)?;
        let matrices = fourier::build(&model, &self.opts.solve.quad)?;
        let bundle =
            crate::increments::CoefficientBundle::new(&self.ctx.spec, &self.ctx.functional)?;
        let ta = matrices.t_apply(&bundle.a_mu);
        let rhs: Vec<f64> = bundle.rhs.iter().zip(&ta).map(|(r, t)| r - t).collect();
        let (c, _res) = matrices.p_matrix().solve_refined(&rhs)?;
        let mse =
            dot(&rhs, &c) + matrices.q_quadratic_form(self.ctx.functional.coeffs());
        Ok((c, mse.max(0.0)))
    }

    fn p_of(&self, state: &State) -> Vec<f64> {
        if self.cointegrated {
            state.g.clone()
        } else {
            (0..self.ctx.m)
                .map(|j| state.f[j] + self.ctx.l2n[j] * state.g[j])
                .collect()
        }
    }

    /// Propose an updated state from the relations with frozen c, with the
    /// damping factor θ; feasibility is restored exactly.
    fn propose(&self, state: &State, c: &[f64], theta: f64) -> (State, bool) {
        match (&self.class.kind, self.cointegrated) {
            (ClassKind::LowerReciprocal { p1, p2 }, false) => {
                self.propose_reciprocal(state, c, theta, *p1, *p2)
            }
            (ClassKind::EpsNeighborhood { eps1, eps2, .. }, false) => {
                self.propose_eps(state, c, theta, *eps1, *eps2)
            }
            (ClassKind::LowerReciprocal { p1, p2 }, true) => {
                self.propose_reciprocal_coint(state, c, theta, *p1, *p2)
            }
            (ClassKind::EpsNeighborhood { eps1, eps2, .. }, true) => {
                self.propose_eps_coint(state, c, theta, *eps1, *eps2)
            }
        }
    }

    fn propose_reciprocal(
        &self,
        state: &State,
        c: &[f64],
        theta: f64,
        p1: f64,
        p2: f64,
    ) -> (State, bool) {
        let mut next = state.clone();
        let mut clamped = false;
        let m = self.ctx.m;
        let (lo_d, hi_d) = (self.opts.density_floor, self.opts.density_ceiling);

        if self.g_fixed.is_none() {
            // relation solved exactly in g with (f, C) frozen:
            // g = f / [ q/α₂ - λ^{2n} ]₊ with q = |A(1-..)^n f - λ^{2n}C|
            // normalized by |1-e^{iλμ}|^n (finite at λ = 0)
            let q: Vec<f64> = (0..m)
                .map(|j| {
                    let cval = poly_at(c, self.ctx.nodes[j]);
                    (self.ctx.a_kconj[j] * state.f[j] - self.ctx.ilp[j] * cval).norm()
                        / self.ctx.sqrt_kappa2[j]
                })
                .collect();
            let g_of = |alpha2: f64, j: usize| -> f64 {
                let bracket = q[j] / alpha2 - self.ctx.l2n[j];
                if bracket > 1e-300 {
                    (state.f[j] / bracket).clamp(lo_d, hi_d)
                } else {
                    hi_d
                }
            };
            let value = |alpha2: f64| -> f64 {
                self.ctx.mean((0..m).map(|j| 1.0 / g_of(alpha2, j)))
            };
            let alpha2 = bisect_decreasing(value, p2);
            let mut g_new = vec![0.0; m];
            for (j, slot) in g_new.iter_mut().enumerate() {
                let raw = g_of(alpha2, j);
                if raw >= hi_d || raw <= lo_d {
                    clamped = true;
                }
                // damp reciprocals: the constraint is linear in 1/g
                let u = (1.0 - theta) / state.g[j] + theta / raw;
                *slot = (1.0 / u).clamp(lo_d, hi_d);
            }
            restore_reciprocal_mean(&self.ctx, &mut g_new, p2, lo_d, hi_d);
            // damp the multiplier with the density so the candidate tends
            // to the current state as θ → 0
            next.alpha2 = (1.0 - theta) * state.alpha2 + theta * alpha2;
            next.g = g_new;
        }

        if self.f_fixed.is_none() {
            let g_cur = next.g.clone();
            let g_scale = g_cur.iter().fold(0.0f64, |s, &x| s.max(x));
            let g_positive = g_cur.iter().all(|&x| x > 1e-10 * (1.0 + g_scale));
            // Ñ = |A(1-..)^n g + C| at nodes
            let n_tilde: Vec<f64> = (0..m)
                .map(|j| {
                    let cval = poly_at(c, self.ctx.nodes[j]);
                    (self.ctx.a_vals[j] * self.ctx.omep[j] * g_cur[j] + cval).norm()
                })
                .collect();
            let p_prev = self.p_of(state);
            let f_of = |alpha1: f64, j: usize| -> f64 {
                if g_positive {
                    // exact: f = λ^{2n} g / [ Ñ/(α₁√|κ|²) - 1 ]₊
                    let bracket = n_tilde[j] / (alpha1 * self.ctx.sqrt_kappa2[j]) - 1.0;
                    if bracket > 1e-300 {
                        (self.ctx.l2n[j] * g_cur[j] / bracket).clamp(lo_d, hi_d)
                    } else {
                        hi_d
                    }
                } else {
                    // g ≡ 0 degenerates the exact form; fall back to the
                    // substitution map f = α₁/h_f with h_f at the previous
                    // iterate
                    let h_f = n_tilde[j] / (self.ctx.sqrt_kappa2[j] * p_prev[j]);
                    (alpha1 / h_f.max(1e-300)).clamp(lo_d, hi_d)
                }
            };
            let value = |alpha1: f64| -> f64 {
                self.ctx.mean((0..m).map(|j| 1.0 / f_of(alpha1, j)))
            };
            let alpha1 = bisect_decreasing(value, p1);
            let mut f_new = vec![0.0; m];
            for (j, slot) in f_new.iter_mut().enumerate() {
                let raw = f_of(alpha1, j);
                if raw >= hi_d || raw <= lo_d {
                    clamped = true;
                }
                let u = (1.0 - theta) / state.f[j] + theta / raw;
                *slot = (1.0 / u).clamp(lo_d, hi_d);
            }
            restore_reciprocal_mean(&self.ctx, &mut f_new, p1, lo_d, hi_d);
            next.alpha1 = (1.0 - theta) * state.alpha1 + theta * alpha1;
            next.f = f_new;
        }
        (next, clamped)
    }

    fn propose_eps(
        &self,
        state: &State,
        c: &[f64],
        theta: f64,
        eps1: f64,
        eps2: f64,
    ) -> (State, bool) {
        let mut next = state.clone();
        let mut clamped = false;
        let (lo_d, hi_d) = (self.opts.density_floor, self.opts.density_ceiling);

        if self.f_fixed.is_none() {
            // relation h_f² = α₁(f - f_ref) solved exactly per node: with
            // Ñ = |A(1-..)^n g + C| frozen it reads
            // (Ñ/√|κ|²)² = α₁ (f - f_ref)(f + λ^{2n} g)², increasing in f
            // on f ≥ f_ref, so a bisection finds the unique root
            let m = self.ctx.m;
            let lhs: Vec<f64> = (0..m)
                .map(|j| {
                    let cval = poly_at(c, self.ctx.nodes[j]);
                    let nt = (self.ctx.a_vals[j] * self.ctx.omep[j] * state.g[j] + cval)
                        .norm()
                        / self.ctx.sqrt_kappa2[j];
                    nt * nt
                })
                .collect();
            let root = |alpha1: f64, j: usize| -> f64 {
                let base = self.f_ref[j].max(lo_d);
                let pg = self.ctx.l2n[j] * state.g[j];
                if lhs[j] <= 0.0 {
                    return base;
                }
                let mut lo = base;
                let mut hi = base + lhs[j] / (alpha1 * (base + pg) * (base + pg)) + 1e-30;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let rhs = alpha1 * (mid - base) * (mid + pg) * (mid + pg);
                    if rhs < lhs[j] {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            // α₁ from the L² sphere by monotone bisection
            let value = |alpha1: f64| -> f64 {
                self.ctx.mean((0..m).map(|j| {
                    let d = root(alpha1, j) - self.f_ref[j].max(lo_d);
                    d * d
                }))
            };
            let alpha1 = bisect_decreasing(value, eps1);
            let mut f_new = vec![0.0; m];
            for j in 0..m {
                let proposed = root(alpha1, j).min(hi_d);
                if proposed >= hi_d {
                    clamped = true;
                }
                f_new[j] = (1.0 - theta) * state.f[j] + theta * proposed;
            }
            // rescale the deviation onto the L² sphere
            let dev2 = self
                .ctx
                .mean(f_new.iter().zip(&self.f_ref).map(|(a, b)| (a - b) * (a - b)));
            if dev2 > 0.0 {
                let s = sqrt(eps1 / dev2);
                for (fj, rj) in f_new.iter_mut().zip(&self.f_ref) {
                    *fj = (rj + (*fj - rj) * s).clamp(lo_d, hi_d);
                }
            }
            next.alpha1 = (1.0 - theta) * state.alpha1 + theta * alpha1;
            next.f = f_new;
        }

        if self.g_fixed.is_none() {
            // active-set form: g' = max{g_ref, (q/√α₂ - f)/λ^{2n}} with
            // q = |A·conj(κ)·f - (iλ)^n C| / √|κ|²; α₂ from the L¹ sphere
            let f_cur = &next.f;
            let q: Vec<f64> = (0..self.ctx.m)
                .map(|j| {
                    let cval = poly_at(c, self.ctx.nodes[j]);
                    (self.ctx.a_kconj[j] * f_cur[j] - self.ctx.ilp[j] * cval).norm()
                        / self.ctx.sqrt_kappa2[j]
                })
                .collect();
            let mass = |sqrt_alpha: f64| -> f64 {
                self.ctx.mean((0..self.ctx.m).map(|j| {
                    let cand = ((q[j] / sqrt_alpha - f_cur[j]) / self.ctx.l2n[j])
                        .clamp(0.0, hi_d);
                    (cand - self.g_ref[j]).max(0.0)
                }))
            };
            let (mut s_lo, mut s_hi) = (1e-18, 1e18);
            for _ in 0..200 {
                let mid = sqrt(s_lo * s_hi);
                if mass(mid) > eps2 {
                    s_lo = mid;
                } else {
                    s_hi = mid;
                }
                if s_hi / s_lo < 1.0 + 1e-14 {
                    break;
                }
            }
            let sqrt_alpha2 = sqrt(s_lo * s_hi);
            let mut g_new = vec![0.0; self.ctx.m];
            for j in 0..self.ctx.m {
                let active = ((q[j] / sqrt_alpha2 - f_cur[j]) / self.ctx.l2n[j]).clamp(0.0, hi_d);
                if active >= hi_d {
                    clamped = true;
                }
                let proposed = self.g_ref[j].max(active);
                g_new[j] = (1.0 - theta) * state.g[j] + theta * proposed;
            }
            // rescale the (nonnegative) deviation onto the L¹ sphere
            let dev = self
                .ctx
                .mean(g_new.iter().zip(&self.g_ref).map(|(a, b)| abs(a - b)));
            if dev > 0.0 {
                let s = eps2 / dev;
                for (gj, rj) in g_new.iter_mut().zip(&self.g_ref) {
                    *gj = (rj + (*gj - rj) * s).max(0.0).min(hi_d);
                }
            }
            next.alpha2 = (1.0 - theta) * state.alpha2 + theta * sqrt_alpha2 * sqrt_alpha2;
            next.g = g_new;
        }
        (next, clamped)
    }

    fn propose_reciprocal_coint(
        &self,
        state: &State,
        c: &[f64],
        theta: f64,
        p1: f64,
        p2: f64,
    ) -> (State, bool) {
        let beta2 = self.beta * self.beta;
        let mut next = state.clone();
        let mut clamped = false;
        let (lo_d, hi_d) = (self.opts.density_floor, self.opts.density_ceiling);
        // p-update from the stationarity-in-p form √q_p · p = α₂: the
        // printed relation degenerates pointwise in p, so the frozen
        // substitution map is used here (damped in the reciprocal domain)
        if self.g_fixed.is_none() {
            let h_p = self.ctx.h_p_coint(c, &state.f, &state.g, beta2);
            let p_of = |alpha2: f64, j: usize| -> f64 {
                (alpha2 / h_p[j].max(1e-300)).clamp(lo_d, hi_d)
            };
            let value =
                |alpha2: f64| -> f64 { self.ctx.mean((0..self.ctx.m).map(|j| 1.0 / p_of(alpha2, j))) };
            let alpha2 = bisect_decreasing(value, p2);
            let mut p_new = vec![0.0; self.ctx.m];
            for (j, slot) in p_new.iter_mut().enumerate() {
                let raw = p_of(alpha2, j);
                if raw >= hi_d || raw <= lo_d {
                    clamped = true;
                }
                let u = (1.0 - theta) / state.g[j] + theta / raw;
                *slot = (1.0 / u).clamp(lo_d, hi_d);
            }
            restore_reciprocal_mean(&self.ctx, &mut p_new, p2, lo_d, hi_d);
            next.alpha2 = (1.0 - theta) * state.alpha2 + theta * alpha2;
            next.g = p_new;
        }
        // f-update: f(√q_f - α₂|β|/p) = α₁ with √q_f the [·]₊ relation
        if self.f_fixed.is_none() {
            let hq = self.ctx.h_fq_coint(c, &state.f, &next.g, beta2);
            let denom: Vec<f64> = (0..self.ctx.m)
                .map(|j| hq[j] - next.alpha2 * abs(self.beta) / next.g[j])
                .collect();
            let f_of = |alpha1: f64, j: usize| -> f64 {
                if denom[j] > 1e-300 {
                    (alpha1 / denom[j]).clamp(lo_d, hi_d)
                } else {
                    hi_d
                }
            };
            let value =
                |alpha1: f64| -> f64 { self.ctx.mean((0..self.ctx.m).map(|j| 1.0 / f_of(alpha1, j))) };
            let alpha1 = bisect_decreasing(value, p1);
            let mut f_new = vec![0.0; self.ctx.m];
            for (j, slot) in f_new.iter_mut().enumerate() {
                let raw = f_of(alpha1, j);
                if raw >= hi_d || raw <= lo_d {
                    clamped = true;
                }
                let u = (1.0 - theta) / state.f[j] + theta / raw;
                *slot = (1.0 / u).clamp(lo_d, hi_d);
            }
            restore_reciprocal_mean(&self.ctx, &mut f_new, p1, lo_d, hi_d);
            next.alpha1 = (1.0 - theta) * state.alpha1 + theta * alpha1;
            next.f = f_new;
        }
        (next, clamped)
    }

    fn propose_eps_coint(
        &self,
        state: &State,
        c: &[f64],
        theta: f64,
        eps1: f64,
        eps2: f64,
    ) -> (State, bool) {
        let beta2 = self.beta * self.beta;
        let mut next = state.clone();
        let mut clamped = false;
        let (lo_d, hi_d) = (self.opts.density_floor, self.opts.density_ceiling);

        // p-update: hq_p² = α₂γ; active set p' = max{p_ref, X/(√α₂·k_n)}
        if self.g_fixed.is_none() {
            let x: Vec<f64> = (0..self.ctx.m)
                .map(|j| {
                    let cval = poly_at(c, self.ctx.nodes[j]);
                    (self.ctx.a_kconj[j] * (beta2 * state.f[j]) - self.ctx.ilp[j] * cval).norm()
                        / self.ctx.sqrt_kappa2[j]
                })
                .collect();
            let mass = |sqrt_alpha: f64| -> f64 {
                self.ctx.mean((0..self.ctx.m).map(|j| {
                    let cand = (x[j] / sqrt_alpha).min(hi_d);
                    (cand - self.g_ref[j]).max(0.0)
                }))
            };
            let (mut s_lo, mut s_hi) = (1e-18, 1e18);
            for _ in 0..200 {
                let mid = sqrt(s_lo * s_hi);
                if mass(mid) > eps2 {
                    s_lo = mid;
                } else {
                    s_hi = mid;
                }
            }
            let sqrt_alpha2 = sqrt(s_lo * s_hi);
            let mut p_new = vec![0.0; self.ctx.m];
            for j in 0..self.ctx.m {
                let active = (x[j] / sqrt_alpha2).min(hi_d);
                if active >= hi_d {
                    clamped = true;
                }
                let proposed = self.g_ref[j].max(active);
                p_new[j] =
                    ((1.0 - theta) * state.g[j] + theta * proposed).clamp(lo_d, hi_d);
            }
            let dev = self
                .ctx
                .mean(p_new.iter().zip(&self.g_ref).map(|(a, b)| abs(a - b)));
            if dev > 0.0 {
                let s = eps2 / dev;
                for (pj, rj) in p_new.iter_mut().zip(&self.g_ref) {
                    *pj = (rj + (*pj - rj) * s).clamp(lo_d, hi_d);
                }
            }
            next.alpha2 = (1.0 - theta) * state.alpha2 + theta * sqrt_alpha2 * sqrt_alpha2;
            next.g = p_new;
        }

        // f-update: hq_f² = α₁(f - f_ref) + α₂β²γ
        if self.f_fixed.is_none() {
            let hq_p = self.ctx.h_p_coint(c, &state.f, &next.g, beta2);
            let hq_f = self.ctx.h_fq_coint(c, &state.f, &next.g, beta2);
            let m = self.ctx.m;
            let mut drive = vec![0.0; m];
            for j in 0..m {
                let gamma = if next.alpha2 > 0.0 {
                    (hq_p[j] * hq_p[j] / next.alpha2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                drive[j] = hq_f[j] * hq_f[j] - next.alpha2 * beta2 * gamma;
            }
            let mean2 = self.ctx.mean(drive.iter().map(|&x| x * x));
            let alpha1 = sqrt(mean2 / eps1).max(1e-300);
            let mut f_new = vec![0.0; m];
            for j in 0..m {
                let proposed = self.f_ref[j] + drive[j] / alpha1;
                let damped = (1.0 - theta) * state.f[j] + theta * proposed;
                let cl = damped.clamp(lo_d, hi_d);
                if cl != damped {
                    clamped = true;
                }
                f_new[j] = cl;
            }
            let dev2 = self
                .ctx
                .mean(f_new.iter().zip(&self.f_ref).map(|(a, b)| (a - b) * (a - b)));
            if dev2 > 0.0 {
                let s = sqrt(eps1 / dev2);
                for (fj, rj) in f_new.iter_mut().zip(&self.f_ref) {
                    *fj = (rj + (*fj - rj) * s).clamp(lo_d, hi_d);
                }
            }
            next.alpha1 = (1.0 - theta) * state.alpha1 + theta * alpha1;
            next.f = f_new;
        }
        (next, clamped)
    }

    /// Residual report of the optimality relations at a state with a given
    /// solution; sup-norms are relative, clamp-active nodes are excluded
    /// from the pointwise relations (the clamp is reported separately).
    fn residuals(&self, state: &State, c: &[f64]) -> (ResidualReport, Vec<f64>) {
        match (&self.class.kind, self.cointegrated) {
            (ClassKind::LowerReciprocal { p1, p2 }, false) => {
                let p = self.p_of(state);
                let mut rep = ResidualReport::default();
                if self.f_fixed.is_none() {
                    let h_f = self.ctx.h_f(c, &state.g, &p);
                    rep.relation_f =
                        self.relation_residual_product(&h_f, &state.f, state.alpha1);
                    rep.constraint_f = abs(
                        self.ctx.mean(state.f.iter().map(|&x| 1.0 / x)) - p1
                    ) / p1;
                }
                if self.g_fixed.is_none() {
                    let h_g = self.ctx.h_g(c, &state.f, &p);
                    rep.relation_g =
                        self.relation_residual_product(&h_g, &state.g, state.alpha2);
                    rep.constraint_g = abs(
                        self.ctx.mean(state.g.iter().map(|&x| 1.0 / x)) - p2
                    ) / p2;
                }
                (rep, Vec::new())
            }
            (ClassKind::EpsNeighborhood { eps1, eps2, .. }, false) => {
                let p = self.p_of(state);
                let mut rep = ResidualReport::default();
                let mut gamma = Vec::new();
                if self.f_fixed.is_none() {
                    let h_f = self.ctx.h_f(c, &state.g, &p);
                    let mut sup = 0.0f64;
                    let scale = 1.0
                        + h_f.iter().fold(0.0f64, |s, &x| s.max(x * x));
                    for j in 0..self.ctx.m {
                        let lhs = h_f[j] * h_f[j];
                        let rhs = state.alpha1 * (state.f[j] - self.f_ref[j]);
                        sup = sup.max(abs(lhs - rhs) / scale);
                    }
                    rep.relation_f = sup;
                    rep.constraint_f = abs(
                        self.ctx.mean(
                            state
                                .f
                                .iter()
                                .zip(&self.f_ref)
                                .map(|(a, b)| (a - b) * (a - b)),
                        ) - eps1,
                    ) / eps1;
                }
                if self.g_fixed.is_none() {
                    let h_g = self.ctx.h_g(c, &state.f, &p);
                    let scale = 1.0 + state.alpha2;
                    let mut sup = 0.0f64;
                    gamma = vec![0.0; self.ctx.m];
                    for j in 0..self.ctx.m {
                        let h2 = h_g[j] * h_g[j];
                        gamma[j] = if state.alpha2 > 0.0 {
                            (h2 / state.alpha2).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                        let active = state.g[j] > self.g_ref[j] * (1.0 + 1e-9) + 1e-12;
                        let r = if active {
                            abs(h2 - state.alpha2)
                        } else {
                            (h2 - state.alpha2).max(0.0)
                        };
                        if state.g[j] < self.opts.density_ceiling * (1.0 - 1e-9) {
                            sup = sup.max(r / scale);
                        }
                    }
                    rep.relation_g = sup;
                    rep.constraint_g = abs(
                        self.ctx.mean(
                            state.g.iter().zip(&self.g_ref).map(|(a, b)| abs(a - b)),
                        ) - eps2,
                    ) / eps2;
                }
                (rep, gamma)
            }
            (ClassKind::LowerReciprocal { p1, p2 }, true) => {
                let beta2 = self.beta * self.beta;
                let mut rep = ResidualReport::default();
                if self.g_fixed.is_none() {
                    let h_p = self.ctx.h_p_coint(c, &state.f, &state.g, beta2);
                    rep.relation_g =
                        self.relation_residual_product(&h_p, &state.g, state.alpha2);
                    rep.constraint_g = abs(
                        self.ctx.mean(state.g.iter().map(|&x| 1.0 / x)) - p2
                    ) / p2;
                }
                if self.f_fixed.is_none() {
                    let hq = self.ctx.h_fq_coint(c, &state.f, &state.g, beta2);
                    // f(√q_f − α₂|β|/p) = α₁ on unclamped nodes
                    let scale = 1.0 + state.alpha1;
                    let mut sup = 0.0f64;
                    for j in 0..self.ctx.m {
                        let lhs = state.f[j]
                            * (hq[j] - state.alpha2 * abs(self.beta) / state.g[j]);
                        if self.unclamped(state.f[j]) {
                            sup = sup.max(abs(lhs - state.alpha1) / scale);
                        }
                    }
                    rep.relation_f = sup;
                    rep.constraint_f = abs(
                        self.ctx.mean(state.f.iter().map(|&x| 1.0 / x)) - p1
                    ) / p1;
                }
                (rep, Vec::new())
            }
            (ClassKind::EpsNeighborhood { eps1, eps2, .. }, true) => {
                let beta2 = self.beta * self.beta;
                let mut rep = ResidualReport::default();
                let hq_p = self.ctx.h_p_coint(c, &state.f, &state.g, beta2);
                let mut gamma = vec![0.0; self.ctx.m];
                for j in 0..self.ctx.m {
                    gamma[j] = if state.alpha2 > 0.0 {
                        (hq_p[j] * hq_p[j] / state.alpha2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                }
                if self.g_fixed.is_none() {
                    let scale = 1.0 + state.alpha2;
                    let mut sup = 0.0f64;
                    for j in 0..self.ctx.m {
                        let h2 = hq_p[j] * hq_p[j];
                        let active = state.g[j] > self.g_ref[j] * (1.0 + 1e-9) + 1e-12;
                        let r = if active {
                            abs(h2 - state.alpha2)
                        } else {
                            (h2 - state.alpha2).max(0.0)
                        };
                        if self.unclamped(state.g[j]) {
                            sup = sup.max(r / scale);
                        }
                    }
                    rep.relation_g = sup;
                    rep.constraint_g = abs(
                        self.ctx.mean(
                            state.g.iter().zip(&self.g_ref).map(|(a, b)| abs(a - b)),
                        ) - eps2,
                    ) / eps2;
                }
                if self.f_fixed.is_none() {
                    let hq_f = self.ctx.h_fq_coint(c, &state.f, &state.g, beta2);
                    let scale = 1.0
                        + hq_f.iter().fold(0.0f64, |s, &x| s.max(x * x));
                    let mut sup = 0.0f64;
                    for j in 0..self.ctx.m {
                        let lhs = hq_f[j] * hq_f[j];
                        let rhs = state.alpha1 * (state.f[j] - self.f_ref[j])
                            + state.alpha2 * beta2 * gamma[j];
                        if self.unclamped(state.f[j]) {
                            sup = sup.max(abs(lhs - rhs) / scale);
                        }
                    }
                    rep.relation_f = sup;
                    rep.constraint_f = abs(
                        self.ctx.mean(
                            state
                                .f
                                .iter()
                                .zip(&self.f_ref)
                                .map(|(a, b)| (a - b) * (a - b)),
                        ) - eps1,
                    ) / eps1;
                }
                (rep, gamma)
            }
        }
    }

    fn unclamped(&self, v: f64) -> bool {
        v > self.opts.density_floor * (1.0 + 1e-9)
            && v < self.opts.density_ceiling * (1.0 - 1e-9)
    }

    /// Residual of `h·d = α` on unclamped nodes, relative to 1 + α.
    fn relation_residual_product(&self, h: &[f64], d: &[f64], alpha: f64) -> f64 {
        let scale = 1.0 + alpha;
        let mut sup = 0.0f64;
        for j in 0..self.ctx.m {
            if self.unclamped(d[j]) {
                sup = sup.max(abs(h[j] * d[j] - alpha) / scale);
            }
        }
        sup
    }

    fn initial_state(&self) -> Result<State> {
        let m = self.ctx.m;
        let sample = |d: &Density| -> Result<Vec<f64>> {
            (0..m)
                .map(|j| d.eval(self.ctx.nodes[j]).map(|v| v.max(0.0)))
                .collect()
        };
        let (f, g) = match &self.class.kind {
            ClassKind::LowerReciprocal { p1, p2 } => {
                let f = match &self.f_fixed {
                    Some(d) => sample(d)?,
                    None => vec![1.0 / p1; m],
                };
                let g = match &self.g_fixed {
                    Some(d) => sample(d)?,
                    None => vec![1.0 / p2; m],
                };
                (f, g)
            }
            ClassKind::EpsNeighborhood { .. } => {
                let f = match &self.f_fixed {
                    Some(d) => sample(d)?,
                    None => self.f_ref.clone(),
                };
                let g = match &self.g_fixed {
                    Some(d) => sample(d)?,
                    None => self.g_ref.clone(),
                };
                (f, g)
            }
        };
        Ok(State {
            f,
            g,
            alpha1: 0.0,
            alpha2: 0.0,
        })
    }
}

/// Bisect a positive parameter so that a monotone-decreasing positive
/// function of it hits `target` (log-scale bisection on a wide bracket).
fn bisect_decreasing(value: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (1e-30f64, 1e30f64);
    for _ in 0..220 {
        let mid = sqrt(lo * hi);
        if value(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-14 {
            break;
        }
    }
    sqrt(lo * hi)
}

/// Rescale a density so that `(1/2π)∫ dλ/d = bound` holds exactly after
/// damping and clamping perturbed it.
fn restore_reciprocal_mean(
    ctx: &GridCtx,
    d: &mut [f64],
    bound: f64,
    lo_d: f64,
    hi_d: f64,
) {
    let m = ctx.mean(d.iter().map(|&x| 1.0 / x));
    if m > 0.0 && abs(m - bound) > 1e-13 * bound {
        let s = m / bound;
        for x in d.iter_mut() {
            *x = (*x * s).clamp(lo_d, hi_d);
        }
    }
}

fn build_problem<'a>(
    class: &'a DensityClass,
    spec: &IncrementSpec,
    functional: &FunctionalSpec,
    cointegrated: bool,
    beta: f64,
    opts: &MinimaxOptions,
) -> Result<Problem<'a>> {
    class.validate()?;
    if opts.grid < 512 || !opts.grid.is_power_of_two() {
        return Err(Error::InvalidSpec(
            "minimax grid must be a power of two, at least 512",
        ));
    }
    let ctx = GridCtx::new(*spec, functional, opts.grid);
    let (f_fixed, g_fixed) = match &class.fixity {
        Fixity::BothFree => (None, None),
        Fixity::SignalKnown(d) => (Some(d.clone()), None),
        Fixity::NoiseKnown(d) => (None, Some(d.clone())),
    };
    let (f_ref, g_ref) = match &class.kind {
        ClassKind::EpsNeighborhood { f_ref, g_ref, .. } => {
            let fr: Result<Vec<f64>> = (0..ctx.m)
                .map(|j| f_ref.eval(ctx.nodes[j]).map(|v| v.max(0.0)))
                .collect();
            let gr: Result<Vec<f64>> = (0..ctx.m)
                .map(|j| g_ref.eval(ctx.nodes[j]).map(|v| v.max(0.0)))
                .collect();
            (fr?, gr?)
        }
        ClassKind::LowerReciprocal { .. } => (Vec::new(), Vec::new()),
    };
    Ok(Problem {
        ctx,
        class,
        cointegrated,
        beta,
        opts: *opts,
        f_fixed,
        g_fixed,
        f_ref,
        g_ref,
    })
}

/// Least favorable pair for the standard (signal-plus-noise) problem.
pub fn least_favorable(
    class: &DensityClass,
    spec: &IncrementSpec,
    functional: &FunctionalSpec,
    opts: &MinimaxOptions,
) -> Result<LeastFavorablePair> {
    run(build_problem(class, spec, functional, false, 1.0, opts)?)
}

/// Least favorable pair `(f⁰, p⁰)` for the cointegrated problem; the
/// class's noise component is read as the constraint on the observed
/// density p.
pub fn least_favorable_cointegrated(
    class: &DensityClass,
    spec: &IncrementSpec,
    functional: &FunctionalSpec,
    beta: f64,
    opts: &MinimaxOptions,
) -> Result<LeastFavorablePair> {
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::InvalidSpec("cointegration beta must be nonzero"));
    }
    run(build_problem(class, spec, functional, true, beta, opts)?)
}

fn run(problem: Problem<'_>) -> Result<LeastFavorablePair> {
    let opts = problem.opts;
    let mut state = problem.initial_state()?;

    // degenerate functional: every admissible pair attains the zero
    // objective; return the feasible initial pair
    if problem.ctx.functional.is_zero() {
        let (c, obj) = problem.light_solve(&state)?;
        let (rep, gamma) = problem.residuals(&state, &c);
        return finalize(problem, state, rep, gamma, 0, true, false, obj);
    }

    let (mut c, mut obj) = problem.light_solve(&state)?;
    let (mut rep, mut gamma) = problem.residuals(&state, &c);
    let mut prev_obj = obj;
    let mut converged = false;
    let mut boundary = false;
    let mut iterations = 0;
    // adaptive damping: a rejected iteration lowers the base factor for
    // the rest of the run (large steps can orbit the fixed point), and
    // accepted iterations let it recover slowly
    let mut theta_base = opts.damping;

    loop {
        // convergence: the relations and constraints hold, and the final
        // step did not decrease the objective beyond rounding
        if iterations > 0
            && rep.sup() < opts.tol
            && obj >= prev_obj - 1e-9 * (1.0 + abs(obj))
        {
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;

        // damped relation step, accepted when the residual sup-norm does
        // not grow; θ halves on rejection within the iteration
        let mut theta = theta_base;
        let mut accepted = false;
        for _ in 0..8 {
            let (candidate, clamped) = problem.propose(&state, &c, theta);
            if let Ok((c_new, obj_new)) = problem.light_solve(&candidate) {
                let (rep_new, gamma_new) = problem.residuals(&candidate, &c_new);
                if rep_new.sup() <= rep.sup() * 1.05 + 1e-12 {
                    prev_obj = obj;
                    state = candidate;
                    c = c_new;
                    obj = obj_new;
                    rep = rep_new;
                    gamma = gamma_new;
                    boundary = clamped;
                    accepted = true;
                    break;
                }
            }
            theta *= 0.5;
        }
        if accepted {
            theta_base = (theta_base * 1.2).min(opts.damping);
        } else {
            theta_base *= 0.25;
            if theta_base < opts.damping / 1024.0 {
                break; // stalled: report diagnostics without convergence
            }
        }
    }

    finalize(problem, state, rep, gamma, iterations, converged, boundary, obj)
}

fn finalize(
    problem: Problem<'_>,
    state: State,
    residuals: ResidualReport,
    gamma: Vec<f64>,
    iterations: usize,
    converged: bool,
    boundary_active: bool,
    objective: f64,
) -> Result<LeastFavorablePair> {
    let model = problem.model(&state)?;
    let robust_solution =
        interpolate::solve(&model, &problem.ctx.functional, &problem.opts.solve)?;

    // boundedness premise of the optimality relations, reported not assumed
    let p = problem.p_of(&state);
    let c = robust_solution.coefficients().to_vec();
    let h_sup = if problem.cointegrated {
        let b2 = problem.beta * problem.beta;
        let hf = problem.ctx.h_fq_coint(&c, &state.f, &p, b2);
        let hp = problem.ctx.h_p_coint(&c, &state.f, &p, b2);
        (
            hf.iter().fold(0.0f64, |s, &x| s.max(x)),
            hp.iter().fold(0.0f64, |s, &x| s.max(x)),
        )
    } else {
        let hf = problem.ctx.h_f(&c, &state.g, &p);
        let hg = problem.ctx.h_g(&c, &state.f, &p);
        (
            hf.iter().fold(0.0f64, |s, &x| s.max(x)),
            hg.iter().fold(0.0f64, |s, &x| s.max(x)),
        )
    };

    Ok(LeastFavorablePair {
        f0: Density::grid(state.f.clone())?,
        g0: Density::grid(state.g.clone())?,
        cointegrated: problem.cointegrated,
        beta: problem.beta,
        alpha1: state.alpha1,
        alpha2: state.alpha2,
        gamma,
        residuals,
        robust_solution,
        iterations,
        converged,
        boundary_active,
        h_sup,
        objective,
        spec: problem.ctx.spec,
        functional: problem.ctx.functional.clone(),
        opts: problem.opts,
    })
}

impl LeastFavorablePair {
    pub fn spec(&self) -> &IncrementSpec {
        &self.spec
    }

    pub fn functional(&self) -> &FunctionalSpec {
        &self.functional
    }

    pub fn options(&self) -> &MinimaxOptions {
        &self.opts
    }

    /// Grid nodes on which `f0`, `g0` and `gamma` are tabulated.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.opts.grid)
            .map(|j| quad::node(j, self.opts.grid))
            .collect()
    }
}

/// `Δ(h⁰; f, g)`: the error of the frozen robust characteristic under an
/// arbitrary admissible pair, by grid quadrature of the two stable reduced
/// integrals. At `(f, g) = (f⁰, g⁰)` this equals the robust solution's
/// mean-square error (two-route identity).
pub fn delta_under(pair: &LeastFavorablePair, f: &Density, g: &Density) -> Result<f64> {
    let ctx = GridCtx::new(pair.spec, &pair.functional, pair.opts.grid);
    let m = ctx.m;
    let c = pair.robust_solution.coefficients();
    let f0: Vec<f64> = (0..m).map(|j| pair.f0.eval(ctx.nodes[j]).unwrap_or(0.0)).collect();
    let g0: Vec<f64> = (0..m).map(|j| pair.g0.eval(ctx.nodes[j]).unwrap_or(0.0)).collect();
    let fv: Result<Vec<f64>> = (0..m).map(|j| f.eval(ctx.nodes[j])).collect();
    let gv: Result<Vec<f64>> = (0..m).map(|j| g.eval(ctx.nodes[j])).collect();
    let (fv, gv) = (fv?, gv?);

    if pair.cointegrated {
        let beta2 = pair.beta * pair.beta;
        // here g0 holds p⁰ and gv holds the perturbed observed density p
        let p0 = &g0;
        let hq_p = ctx.h_p_coint(c, &f0, p0, beta2);
        let hq_f = ctx.h_fq_coint(c, &f0, p0, beta2);
        let mut acc = 0.0;
        for j in 0..m {
            let g_r = (gv[j] - beta2 * fv[j]) / ctx.l2n[j];
            acc += hq_p[j] * hq_p[j] * ctx.l2n[j] * g_r + hq_f[j] * hq_f[j] * fv[j];
        }
        return Ok(acc / m as f64);
    }

    let p0: Vec<f64> = (0..m).map(|j| f0[j] + ctx.l2n[j] * g0[j]).collect();
    let h_f = ctx.h_f(c, &g0, &p0);
    let h_g = ctx.h_g(c, &f0, &p0);
    let mut acc = 0.0;
    for j in 0..m {
        acc += h_g[j] * h_g[j] * gv[j] + h_f[j] * h_f[j] * fv[j];
    }
    Ok(acc / m as f64)
}

/// Draw seeded admissible perturbations and check the saddle inequality
/// `Δ(h⁰; f, g) ≤ Δ(h⁰; f⁰, g⁰) + tol`, re-verify the optimality-relation
/// residuals with the pair's stored multipliers, and check minimality of
/// every sampled model.
pub fn verify_saddle(
    pair: &LeastFavorablePair,
    class: &DensityClass,
    samples: usize,
    seed: u64,
) -> Result<SaddleReport> {
    let opts = pair.opts;
    let ctx = GridCtx::new(pair.spec, &pair.functional, opts.grid);
    let m = ctx.m;
    let delta0 = delta_under(pair, &pair.f0, &pair.g0)?;

    // recompute relation residuals with the stored multipliers (a tampered
    // pair shows up here)
    let problem = build_problem(
        class,
        &pair.spec,
        &pair.functional,
        pair.cointegrated,
        pair.beta,
        &opts,
    )?;
    let f0: Vec<f64> = (0..m).map(|j| pair.f0.eval(ctx.nodes[j]).unwrap_or(0.0)).collect();
    let g0: Vec<f64> = (0..m).map(|j| pair.g0.eval(ctx.nodes[j]).unwrap_or(0.0)).collect();
    let state = State {
        f: f0.clone(),
        g: g0.clone(),
        alpha1: pair.alpha1,
        alpha2: pair.alpha2,
    };
    let (rep, _) = problem.residuals(&state, pair.robust_solution.coefficients());

    let mut rng = SplitMix64::new(seed);
    let mut max_violation = f64::NEG_INFINITY;
    let mut violations = 0usize;
    let mut membership_failures = 0usize;

    for _ in 0..samples {
        let (fs, gs) = draw_admissible(&problem, &ctx, &f0, &g0, &mut rng);
        let f_d = Density::grid(fs)?;
        let g_d = Density::grid(gs)?;
        // minimality (membership) of the sampled model
        let model = if pair.cointegrated {
            ObservationModel::cointegrated(pair.spec, f_d.clone(), g_d.clone(), pair.beta)?
        } else {
            ObservationModel::with_noise(pair.spec, f_d.clone(), g_d.clone())
        };
        match model.minimality_check(&opts.solve.quad) {
            Ok(chk) if chk.satisfied => {}
            _ => membership_failures += 1,
        }
        let delta = delta_under(pair, &f_d, &g_d)?;
        let viol = delta - delta0;
        max_violation = max_violation.max(viol);
        if viol > opts.tol {
            violations += 1;
        }
    }
    if samples == 0 {
        max_violation = 0.0;
    }

    Ok(SaddleReport {
        samples,
        delta_at_pair: delta0,
        max_violation,
        violations,
        residual_sup: rep.sup(),
        membership_failures,
    })
}

/// One admissible perturbed pair: a smooth even multiplicative bump,
/// projected back into the class.
fn draw_admissible(
    problem: &Problem<'_>,
    ctx: &GridCtx,
    f0: &[f64],
    g0: &[f64],
    rng: &mut SplitMix64,
) -> (Vec<f64>, Vec<f64>) {
    let m = ctx.m;
    let mut bump = |scale: f64| -> Vec<f64> {
        let coeffs: Vec<f64> = (0..5).map(|_| rng.range(-1.0, 1.0)).collect();
        (0..m)
            .map(|j| {
                let l = ctx.nodes[j];
                let mut acc = 0.0;
                for (h, ch) in coeffs.iter().enumerate() {
                    acc += ch * crate::math::cos(h as f64 * l) / (h as f64 + 1.0);
                }
                scale * acc
            })
            .collect()
    };
    let floor = problem.opts.density_floor;

    let mut fs = f0.to_vec();
    let mut gs = g0.to_vec();
    match &problem.class.kind {
        ClassKind::LowerReciprocal { p1, p2 } => {
            // retraction projection: shrink the multiplicative bump until
            // the reciprocal bound holds (the bound set is not convex, so
            // rescaling onto the equality surface is not a projection)
            let mut retract = |base: &[f64], bound: f64| -> Vec<f64> {
                let u = bump(0.3);
                let mut t = 1.0f64;
                for _ in 0..14 {
                    let mean = ctx.mean(
                        (0..m).map(|j| 1.0 / (base[j] * (1.0 + t * u[j])).max(floor)),
                    );
                    if mean >= bound * (1.0 - 1e-12) {
                        return (0..m)
                            .map(|j| (base[j] * (1.0 + t * u[j])).max(floor))
                            .collect();
                    }
                    t *= 0.5;
                }
                base.to_vec()
            };
            if problem.f_fixed.is_none() {
                fs = retract(f0, *p1);
            }
            if problem.g_fixed.is_none() {
                gs = retract(g0, *p2);
            }
        }
        ClassKind::EpsNeighborhood { eps1, eps2, .. } => {
            if problem.f_fixed.is_none() {
                let u = bump(sqrt(*eps1));
                for j in 0..m {
                    fs[j] = (f0[j] + u[j]).max(floor);
                }
                for _ in 0..3 {
                    let dev2 = ctx.mean(
                        fs.iter().zip(&problem.f_ref).map(|(a, b)| (a - b) * (a - b)),
                    );
                    if dev2 <= *eps1 {
                        break;
                    }
                    let s = sqrt(eps1 / dev2);
                    for (x, r) in fs.iter_mut().zip(&problem.f_ref) {
                        *x = (r + (*x - r) * s).max(floor);
                    }
                }
            }
            if problem.g_fixed.is_none() {
                let u = bump(*eps2);
                for j in 0..m {
                    gs[j] = (g0[j] + u[j]).max(0.0);
                }
                for _ in 0..3 {
                    let dev = ctx.mean(
                        gs.iter().zip(&problem.g_ref).map(|(a, b)| abs(a - b)),
                    );
                    if dev <= *eps2 {
                        break;
                    }
                    let s = eps2 / dev;
                    for (x, r) in gs.iter_mut().zip(&problem.g_ref) {
                        *x = (r + (*x - r) * s).max(0.0);
                    }
                }
            }
        }
    }
    // grid densities in cointegrated mode stand for p and must stay
    // strictly positive
    if problem.cointegrated {
        for x in gs.iter_mut() {
            *x = x.max(floor);
        }
    }
    (fs, gs)
}
