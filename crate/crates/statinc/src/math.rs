//! Small numeric helpers: `libm` shims for `no_std`, stable evaluation of
//! the increment kernels, integer combinatorics, and a deterministic RNG.
//!
//! The kernels below all come from the factor `(1 - e^{-iλμ})^n / (iλ)^n`
//! that maps the abstract spectral measure to the stationary increment
//! sequence. Everything singular at λ = 0 is expressed through
//! `sinc(λμ/2)`, so no evaluation ever divides by a vanishing quantity.

use num_complex::Complex64;

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// Integer power by repeated multiplication; exact for small exponents.
pub fn powi(x: f64, mut e: u32) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// sin(x)/x with the removable singularity filled in.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if abs(x) < 1e-8 {
        // two-term Taylor; error below 1e-33 on this range
        1.0 - x * x / 6.0
    } else {
        sin(x) / x
    }
}

/// `|1 - e^{iλμ}|^{2n} = (2 sin(λμ/2))^{2n}`.
#[inline]
pub fn k2n(lambda: f64, mu: usize, n: usize) -> f64 {
    let s = 2.0 * sin(lambda * mu as f64 / 2.0);
    powi(s * s, n as u32)
}

/// `|κ(λ)|^2 = |1 - e^{iλμ}|^{2n} / λ^{2n} = (μ sinc(λμ/2))^{2n}`.
///
/// Tends to `μ^{2n}` as λ → 0 and vanishes at λ = 2πj/μ, j ≠ 0.
#[inline]
pub fn kappa2(lambda: f64, mu: usize, n: usize) -> f64 {
    let base = mu as f64 * sinc(lambda * mu as f64 / 2.0);
    powi(base * base, n as u32)
}

/// The increment kernel `κ(λ) = (1 - e^{-iλμ})^n / (iλ)^n`, evaluated as
/// `(μ sinc(λμ/2))^n e^{-i n λ μ / 2}`; equals `μ^n` at λ = 0.
pub fn inc_kernel(lambda: f64, mu: usize, n: usize) -> Complex64 {
    let r = powi(mu as f64 * sinc(lambda * mu as f64 / 2.0), n as u32);
    let phase = -(n as f64) * lambda * mu as f64 / 2.0;
    Complex64::new(r * cos(phase), r * sin(phase))
}

/// `(1 - e^{iλμ})^n` evaluated directly (no singular division involved).
pub fn one_minus_exp_pow(lambda: f64, mu: usize, n: usize) -> Complex64 {
    let base = Complex64::new(1.0 - cos(lambda * mu as f64), -sin(lambda * mu as f64));
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        acc *= base;
    }
    acc
}

/// `e^{iλk}` for integer `k`.
pub fn cis(theta: f64) -> Complex64 {
    Complex64::new(cos(theta), sin(theta))
}

/// `Σ_k coeffs[k] e^{iλk}` (trigonometric polynomial in nonnegative powers).
pub fn poly_at(coeffs: &[f64], lambda: f64) -> Complex64 {
    // Horner in z = e^{iλ}, highest coefficient first.
    let z = cis(lambda);
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// `(iλ)^n` for real λ.
pub fn i_lambda_pow(lambda: f64, n: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let base = Complex64::new(0.0, lambda);
    for _ in 0..n {
        acc *= base;
    }
    acc
}

/// True when λ sits numerically on a zero of `1 - e^{iλμ}` away from the
/// origin, i.e. λ ≈ 2πj/μ with j ≠ 0 — a non-removable pole of the
/// unreduced increment-form densities.
pub fn at_kernel_zero(lambda: f64, mu: usize) -> bool {
    if abs(lambda) < 1e-9 {
        return false;
    }
    let half = lambda * mu as f64 / 2.0;
    let j = libm::round(half / core::f64::consts::PI);
    let dist = abs(half - j * core::f64::consts::PI);
    j != 0.0 && dist < 1e-12
}

/// Binomial coefficient as i128; panics on overflow (orders here are tiny).
pub fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Ceiling of a/b for integers, b > 0 (the "least integer ≥ a/b" used in
/// the increment summation bounds).
#[inline]
pub fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b) + i64::from(a.rem_euclid(b) != 0)
}

/// Floor of a/b for integers, b > 0.
#[inline]
pub fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

/// Relative gap between two scalars, guarded for small magnitudes.
#[inline]
pub fn rel_err(a: f64, b: f64) -> f64 {
    abs(a - b) / (1.0 + abs(a).max(abs(b)))
}

/// SplitMix64: tiny deterministic generator for seeded perturbation draws
/// and randomized tests. Not cryptographic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}
