//! Periodic quadrature and Fourier-coefficient extraction on [-π, π).
//!
//! Integrands are sampled on uniform midpoint grids (nodes never land on
//! ±π, 0, or 2πj/μ for power-of-two sizes), and the rectangle rule is
//! spectrally accurate for the smooth, 2π-periodic integrands produced by
//! the reduced density forms. Adaptive extraction doubles the grid until
//! two successive estimates agree.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{abs, cis};
use crate::Result;

/// Options for grid-doubling extraction.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    /// Initial grid size (power of two).
    pub m0: usize,
    /// Doubling cap.
    pub m_max: usize,
    /// Relative agreement tolerance between successive grids.
    pub tol: f64,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            m0: 4096,
            m_max: 1 << 20,
            tol: 1e-10,
        }
    }
}

/// j-th node of the midpoint grid with m points.
#[inline]
pub fn node(j: usize, m: usize) -> f64 {
    let h = 2.0 * core::f64::consts::PI / m as f64;
    -core::f64::consts::PI + (j as f64 + 0.5) * h
}

/// Fourier coefficients `c(k) = (1/2π) ∫ w(λ) e^{-iλk} dλ` for
/// `k = 0..=kmax` of a real even integrand, on a fixed midpoint grid.
///
/// Evenness makes every coefficient real; the complex parts cancel in
/// symmetric node pairs, so only the real accumulation is kept. The
/// summation order is fixed for determinism.
pub fn fourier_coeffs_fixed<W>(w: W, kmax: usize, m: usize) -> Result<Vec<f64>>
where
    W: Fn(f64) -> Result<f64>,
{
    let mut acc = vec![0.0f64; kmax + 1];
    for j in 0..m {
        let lambda = node(j, m);
        let v = w(lambda)?;
        if !v.is_finite() {
            return Err(Error::QuadratureNotConverged { residual: v });
        }
        let z = cis(-lambda);
        let mut zp = num_complex::Complex64::new(1.0, 0.0);
        for a in acc.iter_mut() {
            *a += v * zp.re;
            zp *= z;
        }
    }
    let inv = 1.0 / m as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(acc)
}

/// Adaptive version of [`fourier_coeffs_fixed`]: doubles the grid until the
/// coefficient vector stabilizes to `opts.tol` relative. `zero_floor` is
/// the natural magnitude of the problem: coefficient vectors that are
/// indistinguishable from zero at that scale count as converged (otherwise
/// an identically-vanishing integrand would divide machine noise by
/// itself and never stabilize).
pub fn fourier_coeffs_adaptive<W>(
    w: W,
    kmax: usize,
    opts: &QuadOpts,
    zero_floor: f64,
) -> Result<Vec<f64>>
where
    W: Fn(f64) -> Result<f64>,
{
    let mut m = opts.m0.max(4 * (kmax + 1)).next_power_of_two();
    let mut prev = fourier_coeffs_fixed(&w, kmax, m)?;
    loop {
        m *= 2;
        let cur = fourier_coeffs_fixed(&w, kmax, m)?;
        let scale = cur
            .iter()
            .fold(0.0f64, |s, c| s.max(abs(*c)))
            .max(zero_floor)
            .max(1e-300);
        let diff = prev
            .iter()
            .zip(&cur)
            .fold(0.0f64, |s, (p, c)| s.max(abs(p - c)));
        if diff <= opts.tol * scale {
            return Ok(cur);
        }
        if m >= opts.m_max {
            return Err(Error::QuadratureNotConverged {
                residual: diff / scale,
            });
        }
        prev = cur;
    }
}

/// Two-sided coefficients `c(k) = (1/2π) ∫ w(λ) e^{-iλk} dλ` for
/// `k = kmin..=kmax` of a complex integrand with conjugate symmetry
/// `w(-λ) = conj(w(λ))` (so every coefficient is real). Returns
/// `(coefficients, max |imaginary part|)`; the caller decides how much
/// residual imaginary mass to tolerate.
pub fn fourier_coeffs_two_sided<W>(
    w: W,
    kmin: i64,
    kmax: i64,
    m: usize,
) -> Result<(Vec<f64>, f64)>
where
    W: Fn(f64) -> Result<num_complex::Complex64>,
{
    debug_assert!(kmin <= kmax);
    let len = (kmax - kmin + 1) as usize;
    let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); len];
    for j in 0..m {
        let lambda = node(j, m);
        let v = w(lambda)?;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::QuadratureNotConverged {
                residual: f64::INFINITY,
            });
        }
        let step = cis(-lambda);
        let mut zp = cis(-lambda * kmin as f64);
        for a in acc.iter_mut() {
            *a += v * zp;
            zp *= step;
        }
    }
    let inv = 1.0 / m as f64;
    let mut out = Vec::with_capacity(len);
    let mut max_im = 0.0f64;
    for a in &acc {
        out.push(a.re * inv);
        max_im = max_im.max(abs(a.im * inv));
    }
    Ok((out, max_im))
}

/// Adaptive wrapper for [`fourier_coeffs_two_sided`] (grid doubling until
/// the coefficient vector stabilizes; `zero_floor` as in
/// [`fourier_coeffs_adaptive`]).
pub fn fourier_coeffs_two_sided_adaptive<W>(
    w: W,
    kmin: i64,
    kmax: i64,
    opts: &QuadOpts,
    zero_floor: f64,
) -> Result<(Vec<f64>, f64)>
where
    W: Fn(f64) -> Result<num_complex::Complex64>,
{
    let span = (kmax - kmin + 1) as usize;
    let mut m = opts.m0.max(4 * span).next_power_of_two();
    let mut prev = fourier_coeffs_two_sided(&w, kmin, kmax, m)?.0;
    loop {
        m *= 2;
        let (cur, cur_im) = fourier_coeffs_two_sided(&w, kmin, kmax, m)?;
        let scale = cur
            .iter()
            .fold(0.0f64, |s, c| s.max(abs(*c)))
            .max(zero_floor)
            .max(1e-300);
        let diff = prev
            .iter()
            .zip(&cur)
            .fold(0.0f64, |s, (p, c)| s.max(abs(p - c)));
        if diff <= opts.tol * scale {
            return Ok((cur, cur_im));
        }
        if m >= opts.m_max {
            return Err(Error::QuadratureNotConverged {
                residual: diff / scale,
            });
        }
        prev = cur;
    }
}

/// Mean value `(1/2π) ∫ w dλ` on a fixed midpoint grid.
pub fn mean_fixed<W>(w: W, m: usize) -> Result<f64>
where
    W: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for j in 0..m {
        let v = w(node(j, m))?;
        if v.is_nan() {
            return Err(Error::QuadratureNotConverged { residual: v });
        }
        acc += v;
    }
    Ok(acc / m as f64)
}

/// Outcome of the divergence-aware mean estimate used by the minimality
/// check.
#[derive(Debug, Clone, Copy)]
pub struct MeanEstimate {
    pub value: f64,
    pub converged: bool,
    /// Successive grid estimates kept growing: the integral diverges.
    pub diverging: bool,
}

/// Mean value with grid doubling; distinguishes divergence (estimates grow
/// without bound, or an infinite sample) from plain non-convergence.
pub fn mean_adaptive<W>(w: W, opts: &QuadOpts) -> Result<MeanEstimate>
where
    W: Fn(f64) -> Result<f64>,
{
    let mut m = opts.m0;
    let mut prev = mean_fixed(&w, m)?;
    if prev.is_infinite() {
        return Ok(MeanEstimate {
            value: prev,
            converged: false,
            diverging: true,
        });
    }
    let mut growth_streak = 0usize;
    loop {
        m *= 2;
        let cur = mean_fixed(&w, m)?;
        if cur.is_infinite() {
            return Ok(MeanEstimate {
                value: cur,
                converged: false,
                diverging: true,
            });
        }
        let scale = abs(cur).max(abs(prev)).max(1e-300);
        if abs(cur - prev) <= opts.tol * scale {
            return Ok(MeanEstimate {
                value: cur,
                converged: true,
                diverging: false,
            });
        }
        if cur > prev * 1.25 && cur > 0.0 {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Ok(MeanEstimate {
                    value: cur,
                    converged: false,
                    diverging: true,
                });
            }
        } else {
            growth_streak = 0;
        }
        if m >= opts.m_max {
            return Err(Error::QuadratureNotConverged {
                residual: abs(cur - prev) / scale,
            });
        }
        prev = cur;
    }
}
