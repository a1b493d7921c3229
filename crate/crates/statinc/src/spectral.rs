//! Evaluable spectral densities and the observation model.
//!
//! A signal with stationary n-th increments has a (pseudo)density of the
//! form `f(λ) = λ^{2n} ψ(λ) / |1 - e^{-iλμ}|^{2n}` where ψ is the plain
//! stationary density of the increment sequence. Working with `ψ` (the
//! "reduced" form) removes the 0/0 at λ = 0 algebraically; this module
//! never takes numerical limits in the rational case.
//!
//! Two concrete representations are supported: exact rational forms (ratios
//! of squared-modulus trigonometric polynomials, enabling closed-form
//! Fourier coefficients downstream) and grid-tabulated samples on the
//! canonical midpoint grid (the form produced by the least-favorable
//! density solvers). Composite sums `f + λ^{2n} g` and scalar multiples
//! cover the observed density of a signal-plus-noise pair.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::increments::IncrementSpec;
use crate::math::{abs, at_kernel_zero, cos, k2n, kappa2, powi, sqrt};
use crate::quad::{self, QuadOpts};
use crate::Result;

/// Default canonical grid resolution.
pub const DEFAULT_GRID: usize = 4096;

/// Symmetric trigonometric polynomial `c(0) + 2 Σ_{k≥1} c(k) cos(kλ)`,
/// i.e. real even Fourier coefficients indexed by nonnegative lag.
#[derive(Debug, Clone, PartialEq)]
pub struct SymPoly {
    c: Vec<f64>,
}

impl SymPoly {
    pub fn new(c: Vec<f64>) -> Self {
        debug_assert!(!c.is_empty());
        Self { c }
    }

    pub fn constant(v: f64) -> Self {
        Self { c: vec![v] }
    }

    /// `|Σ_j q(j) e^{-iλj}|²` from the factor coefficients q: the lag-k
    /// coefficient is the factor autocorrelation Σ_j q(j) q(j+k).
    pub fn from_factor(q: &[f64]) -> Self {
        debug_assert!(!q.is_empty());
        let d = q.len() - 1;
        let mut c = vec![0.0; d + 1];
        for (k, slot) in c.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=(d - k) {
                acc += q[j] * q[j + k];
            }
            *slot = acc;
        }
        Self { c }
    }

    /// `|1 - e^{-iλμ}|^{2n}` as a symmetric polynomial.
    pub fn increment_kernel(mu: usize, n: usize) -> Self {
        let mut base = vec![0.0; mu + 1];
        base[0] = 2.0;
        base[mu] = -1.0;
        let base = Self::new(base);
        let mut acc = Self::constant(1.0);
        for _ in 0..n {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let mut acc = self.c[0];
        for (k, &ck) in self.c.iter().enumerate().skip(1) {
            acc += 2.0 * ck * cos(k as f64 * lambda);
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.c.len().max(other.c.len());
        let mut c = vec![0.0; len];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = self.c.get(k).copied().unwrap_or(0.0) + other.c.get(k).copied().unwrap_or(0.0);
        }
        Self { c }
    }

    /// Product via full signed-lag convolution.
    pub fn mul(&self, other: &Self) -> Self {
        let (da, db) = (self.degree() as i64, other.degree() as i64);
        let dm = da + db;
        let mut c = vec![0.0; dm as usize + 1];
        for m in 0..=dm {
            let mut acc = 0.0;
            for u in -da..=da {
                let v = m - u;
                if v.abs() <= db {
                    acc += self.c[u.unsigned_abs() as usize] * other.c[v.unsigned_abs() as usize];
                }
            }
            c[m as usize] = acc;
        }
        Self { c }
    }

    /// Constant value if all nonzero-lag coefficients are negligible.
    pub fn as_constant(&self, rel_tol: f64) -> Option<f64> {
        let scale = self.c.iter().fold(0.0f64, |s, v| s.max(abs(*v)));
        if self
            .c
            .iter()
            .skip(1)
            .all(|v| abs(*v) <= rel_tol * scale.max(1e-300))
        {
            Some(self.c[0])
        } else {
            None
        }
    }

    /// Minimum over a dense sampling; adequate to decide strict positivity.
    pub fn grid_min(&self, m: usize) -> f64 {
        let mut lo = f64::INFINITY;
        for j in 0..m {
            lo = lo.min(self.eval(quad::node(j, m)));
        }
        lo
    }
}

/// Ratio of symmetric trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct SymRatio {
    pub num: SymPoly,
    pub den: SymPoly,
}

impl SymRatio {
    pub fn new(num: SymPoly, den: SymPoly) -> Self {
        // normalize so den lag-0 is 1; lag-0 of a squared modulus is > 0
        let d0 = den.c[0];
        if d0 != 0.0 && d0 != 1.0 {
            Self {
                num: num.scale(1.0 / d0),
                den: den.scale(1.0 / d0),
            }
        } else {
            Self { num, den }
        }
    }

    pub fn zero() -> Self {
        Self {
            num: SymPoly::constant(0.0),
            den: SymPoly::constant(1.0),
        }
    }

    pub fn constant(v: f64) -> Self {
        Self {
            num: SymPoly::constant(v),
            den: SymPoly::constant(1.0),
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.num.eval(lambda) / self.den.eval(lambda)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn mul_poly(&self, p: &SymPoly) -> Self {
        Self::new(self.num.mul(p), self.den.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }

    /// The ratio as a plain polynomial when the denominator is constant.
    pub fn as_poly(&self) -> Option<SymPoly> {
        self.den
            .as_constant(1e-14)
            .map(|d| self.num.scale(1.0 / d))
    }
}

/// Nonnegative samples on the canonical midpoint grid over [-π, π),
/// evaluated by periodic linear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 8 || !m.is_power_of_two() {
            return Err(Error::InvalidDensity(
                "grid length must be a power of two, at least 8",
            ));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidDensity(
                "grid samples must be finite and nonnegative",
            ));
        }
        Ok(Self { values })
    }

    pub fn from_fn<F>(m: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let mut values = Vec::with_capacity(m);
        for j in 0..m {
            values.push(f(quad::node(j, m))?);
        }
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let m = self.values.len();
        let h = 2.0 * core::f64::consts::PI / m as f64;
        // position in node units; node j sits at -π + (j + 1/2) h
        let u = (lambda + core::f64::consts::PI) / h - 0.5;
        let base = libm::floor(u);
        let frac = u - base;
        let i0 = (base as i64).rem_euclid(m as i64) as usize;
        let i1 = (i0 + 1) % m;
        (1.0 - frac) * self.values[i0] + frac * self.values[i1]
    }
}

/// Evaluable spectral density.
///
/// `IncrementRational` is the reduced rational form of a stationary-
/// increment signal; `Rational` is a plain stationary density (noise);
/// `Grid` carries tabulated samples; `Composite` is `base + λ^{2n}·noise`
/// (the observed density of a signal-plus-noise pair); `Scaled` is a
/// nonnegative multiple.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Zero,
    Rational(SymRatio),
    IncrementRational {
        psi: SymRatio,
        n: usize,
        mu: usize,
    },
    Grid(GridDensity),
    Composite {
        base: Box<Density>,
        noise: Box<Density>,
        n: usize,
    },
    Scaled {
        factor: f64,
        inner: Box<Density>,
    },
}

impl Density {
    /// Plain stationary density `|num(e^{-iλ})|² / |den(e^{-iλ})|²` given
    /// the factor coefficient vectors.
    pub fn rational_from_factors(num: &[f64], den: &[f64]) -> Result<Self> {
        check_factor(num)?;
        check_factor(den)?;
        Ok(Density::Rational(SymRatio::new(
            SymPoly::from_factor(num),
            SymPoly::from_factor(den),
        )))
    }

    /// Reduced increment form `λ^{2n} ψ(λ) / |1 - e^{-iλμ}|^{2n}` with
    /// `ψ = |num|²/|den|²` from factor coefficients.
    pub fn increment_rational_from_factors(
        spec: &IncrementSpec,
        num: &[f64],
        den: &[f64],
    ) -> Result<Self> {
        check_factor(num)?;
        check_factor(den)?;
        Ok(Density::IncrementRational {
            psi: SymRatio::new(SymPoly::from_factor(num), SymPoly::from_factor(den)),
            n: spec.n(),
            mu: spec.mu(),
        })
    }

    pub fn constant(v: f64) -> Result<Self> {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDensity("constant density must be >= 0"));
        }
        Ok(Density::Rational(SymRatio::constant(v)))
    }

    pub fn grid(values: Vec<f64>) -> Result<Self> {
        Ok(Density::Grid(GridDensity::new(values)?))
    }

    pub fn scaled(factor: f64, inner: Density) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidDensity("scale factor must be >= 0"));
        }
        Ok(Density::Scaled {
            factor,
            inner: Box::new(inner),
        })
    }

    /// `base + λ^{2n}·noise`.
    pub fn composite(base: Density, noise: Density, n: usize) -> Self {
        Density::Composite {
            base: Box::new(base),
            noise: Box::new(noise),
            n,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Density::Zero => true,
            Density::Rational(r) => r.num.coeffs().iter().all(|c| *c == 0.0),
            Density::Grid(g) => g.values().iter().all(|v| *v == 0.0),
            Density::Scaled { factor, inner } => *factor == 0.0 || inner.is_zero(),
            Density::Composite { base, noise, .. } => base.is_zero() && noise.is_zero(),
            Density::IncrementRational { psi, .. } => {
                psi.num.coeffs().iter().all(|c| *c == 0.0)
            }
        }
    }

    /// Density value at λ. Increment-rational forms evaluate through the
    /// factored representation, so λ = 0 is exact; the genuine poles at
    /// λ = 2πj/μ (j ≠ 0, μ > 1) are reported as errors.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        match self {
            Density::Zero => Ok(0.0),
            Density::Rational(r) => Ok(r.eval(lambda).max(0.0)),
            Density::IncrementRational { psi, n, mu } => {
                if at_kernel_zero(lambda, *mu) {
                    return Err(Error::Pole { lambda });
                }
                Ok(psi.eval(lambda).max(0.0) / kappa2(lambda, *mu, *n))
            }
            Density::Grid(g) => Ok(g.eval(lambda).max(0.0)),
            Density::Composite { base, noise, n } => {
                let l2n = powi(lambda * lambda, *n as u32);
                Ok(base.eval(lambda)? + l2n * noise.eval(lambda)?)
            }
            Density::Scaled { factor, inner } => Ok(factor * inner.eval(lambda)?),
        }
    }

    /// Weighted value `|κ(λ)|² · density(λ)` — the reduced form in which
    /// every increment-domain integrand is expressed. For the increment-
    /// rational form this is ψ(λ) exactly (no pole anywhere).
    pub fn eval_weighted(&self, lambda: f64, spec: &IncrementSpec) -> Result<f64> {
        match self {
            Density::Zero => Ok(0.0),
            Density::IncrementRational { psi, n, mu } if *n == spec.n() && *mu == spec.mu() => {
                Ok(psi.eval(lambda).max(0.0))
            }
            Density::Composite { base, noise, n } if *n == spec.n() => {
                let k = k2n(lambda, spec.mu(), spec.n());
                Ok(base.eval_weighted(lambda, spec)? + k * noise.eval(lambda)?)
            }
            Density::Scaled { factor, inner } => {
                Ok(factor * inner.eval_weighted(lambda, spec)?)
            }
            _ => Ok(kappa2(lambda, spec.mu(), spec.n()) * self.eval(lambda)?),
        }
    }

    /// The weighted form `|κ|²·density` as an exact trig-polynomial ratio,
    /// when the representation allows it.
    pub fn weighted_sym(&self, spec: &IncrementSpec) -> Option<SymRatio> {
        match self {
            Density::Zero => Some(SymRatio::zero()),
            Density::IncrementRational { psi, n, mu } if *n == spec.n() && *mu == spec.mu() => {
                Some(psi.clone())
            }
            Density::Composite { base, noise, n } if *n == spec.n() => {
                let b = base.weighted_sym(spec)?;
                let g = noise.plain_sym()?;
                let k = SymPoly::increment_kernel(spec.mu(), spec.n());
                Some(b.add(&g.mul_poly(&k)))
            }
            Density::Scaled { factor, inner } => Some(inner.weighted_sym(spec)?.scale(*factor)),
            _ => None,
        }
    }

    /// The density itself as a trig-polynomial ratio (plain stationary
    /// representations only).
    pub fn plain_sym(&self) -> Option<SymRatio> {
        match self {
            Density::Zero => Some(SymRatio::zero()),
            Density::Rational(r) => Some(r.clone()),
            Density::Scaled { factor, inner } => Some(inner.plain_sym()?.scale(*factor)),
            _ => None,
        }
    }

    /// Grid resolution if any part of the density is grid-tabulated; the
    /// coarsest grid governs the quadrature resolution.
    pub fn grid_len(&self) -> Option<usize> {
        match self {
            Density::Grid(g) => Some(g.len()),
            Density::Composite { base, noise, .. } => match (base.grid_len(), noise.grid_len()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            Density::Scaled { inner, .. } => inner.grid_len(),
            _ => None,
        }
    }
}

fn check_factor(q: &[f64]) -> Result<()> {
    if q.is_empty() {
        return Err(Error::InvalidDensity("empty factor coefficient vector"));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidDensity("factor coefficients must be finite"));
    }
    Ok(())
}

/// Observation structure: what is observed outside the gap.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationMode {
    /// ζ = ξ (noise-free observations of the signal itself).
    NoiseFree { f: Density },
    /// ζ = ξ + η with stationary noise density g.
    SignalPlusNoise { f: Density, g: Density },
    /// ζ cointegrated with ξ: ζ - βξ stationary; p is the density of ζ.
    Cointegrated { f: Density, p: Density, beta: f64 },
}

/// The full observation model: increment structure plus densities.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    spec: IncrementSpec,
    mode: ObservationMode,
}

impl ObservationModel {
    pub fn noise_free(spec: IncrementSpec, f: Density) -> Self {
        Self {
            spec,
            mode: ObservationMode::NoiseFree { f },
        }
    }

    pub fn with_noise(spec: IncrementSpec, f: Density, g: Density) -> Self {
        if g.is_zero() {
            Self::noise_free(spec, f)
        } else {
            Self {
                spec,
                mode: ObservationMode::SignalPlusNoise { f, g },
            }
        }
    }

    pub fn cointegrated(spec: IncrementSpec, f: Density, p: Density, beta: f64) -> Result<Self> {
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::InvalidSpec("cointegration beta must be nonzero"));
        }
        Ok(Self {
            spec,
            mode: ObservationMode::Cointegrated { f, p, beta },
        })
    }

    pub fn spec(&self) -> &IncrementSpec {
        &self.spec
    }

    pub fn mode(&self) -> &ObservationMode {
        &self.mode
    }

    pub fn is_cointegrated(&self) -> bool {
        matches!(self.mode, ObservationMode::Cointegrated { .. })
    }

    pub fn beta(&self) -> f64 {
        match &self.mode {
            ObservationMode::Cointegrated { beta, .. } => *beta,
            _ => 1.0,
        }
    }

    /// Signal density f.
    pub fn f(&self) -> &Density {
        match &self.mode {
            ObservationMode::NoiseFree { f }
            | ObservationMode::SignalPlusNoise { f, .. }
            | ObservationMode::Cointegrated { f, .. } => f,
        }
    }

    /// Noise density g (zero in the noise-free and cointegrated modes,
    /// where no additive stationary noise appears).
    pub fn g(&self) -> &Density {
        match &self.mode {
            ObservationMode::SignalPlusNoise { g, .. } => g,
            _ => &Density::Zero,
        }
    }

    /// Density of the observed sequence: `f + λ^{2n} g`, or `p` directly in
    /// the cointegrated mode.
    pub fn observed_weighted(&self, lambda: f64) -> Result<f64> {
        match &self.mode {
            ObservationMode::NoiseFree { f } => f.eval_weighted(lambda, &self.spec),
            ObservationMode::SignalPlusNoise { f, g } => {
                Ok(f.eval_weighted(lambda, &self.spec)?
                    + k2n(lambda, self.spec.mu(), self.spec.n()) * g.eval(lambda)?)
            }
            ObservationMode::Cointegrated { p, .. } => p.eval_weighted(lambda, &self.spec),
        }
    }

    /// `|κ|² f(λ)`.
    pub fn signal_weighted(&self, lambda: f64) -> Result<f64> {
        self.f().eval_weighted(lambda, &self.spec)
    }

    /// Noise value g(λ); in the cointegrated mode this is the stationary
    /// remainder density `λ^{-2n}(p - β²f)`, which the model does not
    /// assume nonnegative.
    pub fn noise_value(&self, lambda: f64) -> Result<f64> {
        match &self.mode {
            ObservationMode::NoiseFree { .. } => Ok(0.0),
            ObservationMode::SignalPlusNoise { g, .. } => g.eval(lambda),
            ObservationMode::Cointegrated { f, p, beta } => {
                if at_kernel_zero(lambda, self.spec.mu()) {
                    return Err(Error::Pole { lambda });
                }
                let b2 = beta * beta;
                // If p is structurally base + λ^{2n}·noise, only the base
                // difference goes through the k2n division: the noise part
                // would otherwise be destroyed by cancellation near λ = 0
                // (rounding there is amplified by λ^{-2n}).
                match p {
                    Density::Composite { base, noise, n } if *n == self.spec.n() => {
                        Ok(noise.eval(lambda)?
                            + self.weighted_diff_over_k2n(base, f, b2, lambda)?)
                    }
                    _ => self.weighted_diff_over_k2n(p, f, b2, lambda),
                }
            }
        }
    }

    /// `(|κ|²·base - β²·|κ|²·f) / |1-e^{iλμ}|^{2n}` with the removable 0/0
    /// at the origin handled by a symmetric average. Exact (zero) when the
    /// two weighted densities evaluate identically.
    fn weighted_diff_over_k2n(
        &self,
        base: &Density,
        f: &Density,
        b2: f64,
        lambda: f64,
    ) -> Result<f64> {
        let diff = base.eval_weighted(lambda, &self.spec)?
            - b2 * f.eval_weighted(lambda, &self.spec)?;
        if diff == 0.0 {
            return Ok(0.0);
        }
        if abs(lambda) < 1e-9 {
            let d = 1e-5;
            let at = |l: f64| -> Result<f64> {
                let v = base.eval_weighted(l, &self.spec)?
                    - b2 * f.eval_weighted(l, &self.spec)?;
                Ok(v / k2n(l, self.spec.mu(), self.spec.n()))
            };
            return Ok(0.5 * (at(lambda - d)? + at(lambda + d)?));
        }
        Ok(diff / k2n(lambda, self.spec.mu(), self.spec.n()))
    }

    /// The observed weighted density as an exact ratio when available.
    pub fn observed_weighted_sym(&self) -> Option<SymRatio> {
        match &self.mode {
            ObservationMode::NoiseFree { f } => f.weighted_sym(&self.spec),
            ObservationMode::SignalPlusNoise { f, g } => {
                let wf = f.weighted_sym(&self.spec)?;
                let gs = g.plain_sym()?;
                let k = SymPoly::increment_kernel(self.spec.mu(), self.spec.n());
                Some(wf.add(&gs.mul_poly(&k)))
            }
            ObservationMode::Cointegrated { p, .. } => p.weighted_sym(&self.spec),
        }
    }

    /// Grid resolution governing fixed-grid quadrature, if any density is
    /// grid-tabulated.
    pub fn grid_len(&self) -> Option<usize> {
        let direct = match &self.mode {
            ObservationMode::NoiseFree { f } => f.grid_len(),
            ObservationMode::SignalPlusNoise { f, g } => match (f.grid_len(), g.grid_len()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
            ObservationMode::Cointegrated { f, p, .. } => match (f.grid_len(), p.grid_len()) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            },
        };
        direct
    }

    /// Reduced minimality integrand `r(λ) = λ^{2n}/(|1-e^{iλμ}|^{2n} p(λ))`
    /// with the removable singularity eliminated: `r = 1 / p_red` where
    /// `p_red = |κ|² p`.
    pub fn reduced_integrand(&self) -> ReducedIntegrand<'_> {
        ReducedIntegrand { model: self }
    }

    /// Numerically estimate the minimality integral `∫ r dλ` and decide
    /// whether the minimality condition holds.
    ///
    /// For rational reduced forms bounded below by a positive constant the
    /// condition is decided structurally (no quadrature is needed for the
    /// decision, though the integral is still reported).
    pub fn minimality_check(&self, opts: &QuadOpts) -> Result<MinimalityCheck> {
        let r = self.reduced_integrand();
        if let Some(ratio) = self.observed_weighted_sym() {
            // r = den/num; bounded below iff num is bounded away from zero
            let probe = 4096.max(4 * (ratio.num.degree() + 1)).next_power_of_two();
            let num_min = ratio.num.grid_min(probe);
            let num_max = ratio
                .num
                .coeffs()
                .iter()
                .fold(0.0f64, |s, c| s.max(abs(*c)));
            if num_min > 1e-12 * num_max.max(1e-300) {
                let est = quad::mean_adaptive(|l| r.eval(l), opts)?;
                return Ok(MinimalityCheck {
                    satisfied: true,
                    integral: Some(2.0 * core::f64::consts::PI * est.value),
                    converged: est.converged,
                    bounded_below: true,
                });
            }
        }
        let est = match self.grid_len() {
            Some(m) => {
                let v = quad::mean_fixed(|l| r.eval(l), m)?;
                quad::MeanEstimate {
                    value: v,
                    converged: v.is_finite(),
                    diverging: !v.is_finite(),
                }
            }
            None => quad::mean_adaptive(|l| r.eval(l), opts)?,
        };
        Ok(MinimalityCheck {
            satisfied: est.converged && !est.diverging,
            integral: Some(2.0 * core::f64::consts::PI * est.value),
            converged: est.converged,
            bounded_below: false,
        })
    }

    /// Shorthand: error out unless minimality holds.
    pub fn require_minimality(&self, opts: &QuadOpts) -> Result<MinimalityCheck> {
        let check = self.minimality_check(opts)?;
        if !check.satisfied {
            return Err(Error::MinimalityViolated {
                integral_estimate: check.integral.unwrap_or(f64::INFINITY),
            });
        }
        Ok(check)
    }
}

/// Result of the minimality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalityCheck {
    pub satisfied: bool,
    /// Estimate of `∫ r dλ` (may be infinite when divergent).
    pub integral: Option<f64>,
    pub converged: bool,
    /// The reduced rational form was bounded below by a positive constant,
    /// deciding the condition without quadrature.
    pub bounded_below: bool,
}

/// Evaluator of the reduced minimality integrand.
#[derive(Debug, Clone, Copy)]
pub struct ReducedIntegrand<'a> {
    model: &'a ObservationModel,
}

impl ReducedIntegrand<'_> {
    /// `r(λ) = 1 / p_red(λ)`; at an exact kernel zero away from the origin
    /// (grid densities with μ > 1) falls back to a symmetric limiting
    /// average.
    pub fn eval(&self, lambda: f64) -> Result<f64> {
        match self.model.observed_weighted(lambda) {
            Ok(p_red) => {
                if p_red <= 0.0 {
                    Ok(f64::INFINITY)
                } else {
                    Ok(1.0 / p_red)
                }
            }
            Err(Error::Pole { .. }) => {
                let d = 1e-6;
                let a = self.model.observed_weighted(lambda - d)?;
                let b = self.model.observed_weighted(lambda + d)?;
                let avg = 0.5 * (1.0 / a.max(1e-300) + 1.0 / b.max(1e-300));
                Ok(avg)
            }
            Err(e) => Err(e),
        }
    }
}

/// Reference ARIMA-style density used widely in tests: the increment
/// sequence is AR(1) with coefficient φ, i.e.
/// `f(λ) = λ^{2n} / (|1 - e^{-iλμ}|^{2n} |1 + φ e^{-iλ}|²)`.
pub fn ar1_increment_density(spec: &IncrementSpec, phi: f64) -> Density {
    Density::IncrementRational {
        psi: SymRatio::new(SymPoly::constant(1.0), SymPoly::from_factor(&[1.0, phi])),
        n: spec.n(),
        mu: spec.mu(),
    }
}

/// Square root helper for density magnitudes (re-exported for the minimax
/// module's residual normalization).
pub fn density_sqrt(v: f64) -> f64 {
    sqrt(v.max(0.0))
}
