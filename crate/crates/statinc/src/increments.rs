//! Exact coefficient algebra for n-th increments with step μ.
//!
//! The increment operator `(1 - B_μ)^n` (with `B_μ` the backward shift by
//! μ) induces four coefficient families used throughout the solver:
//!
//! - `d_μ(k)`: power-series coefficients of `(Σ_j x^{μj})^n`, the formal
//!   inverse of the increment operator;
//! - `b_{μ,N}(k) = Σ_{m=k}^N a(m) d_μ(m-k)`: the target functional
//!   rewritten on increments;
//! - `v_{μ,N}(k)`: boundary weights on the raw values at `k = -μn..-1`;
//! - `a_{μ,N}(m)`: the functional pushed through the increment operator.
//!
//! All arithmetic here is exact: `d` is integer-valued and the other
//! families are sums of products of inputs with integers, so for integer
//! inputs there is no floating error at all.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{binomial, ceil_div, floor_div};
use crate::Result;

/// Structural parameters: increment order `n ≥ 1`, step `mu ≥ 1`, and the
/// last missing index `gap_end` (the gap is `{0, …, gap_end}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncrementSpec {
    n: usize,
    mu: usize,
    gap_end: usize,
}

impl IncrementSpec {
    pub fn new(n: usize, mu: usize, gap_end: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidSpec("increment order n must be >= 1"));
        }
        if mu < 1 {
            return Err(Error::InvalidSpec("increment step mu must be >= 1"));
        }
        Ok(Self { n, mu, gap_end })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// Last missing index N; the gap is {0, …, N}.
    pub fn gap_end(&self) -> usize {
        self.gap_end
    }

    /// Length μ·n of the boundary block of raw values at -μn..-1.
    pub fn boundary_len(&self) -> usize {
        self.mu * self.n
    }

    /// Dimension N + μn + 1 of the linear system.
    pub fn system_dim(&self) -> usize {
        self.gap_end + self.boundary_len() + 1
    }

    /// Number of functional coefficients, N + 1.
    pub fn functional_len(&self) -> usize {
        self.gap_end + 1
    }
}

/// Coefficients `a(0..N)` of the target functional `Σ a(k) ξ(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSpec {
    coeffs: Vec<f64>,
}

impl FunctionalSpec {
    /// A functional covers exactly the gap: one coefficient per missing
    /// index. The all-zero functional is allowed (everything downstream is
    /// linear in `a` and degenerates consistently to zero).
    pub fn new(spec: &IncrementSpec, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != spec.functional_len() {
            return Err(Error::DimensionMismatch {
                expected: spec.functional_len(),
                got: coeffs.len(),
            });
        }
        Ok(Self { coeffs })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Indicator functional `a = e_p` selecting the single value ξ(p).
    pub fn point(spec: &IncrementSpec, p: usize) -> Result<Self> {
        if p > spec.gap_end() {
            return Err(Error::InvalidSpec("point index outside the gap"));
        }
        let mut coeffs = vec![0.0; spec.functional_len()];
        coeffs[p] = 1.0;
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// `d_μ(0..kmax)`: coefficients of `(Σ_{j≥0} x^{μj})^n`.
///
/// Computed by n successive multiplications with the geometric series in
/// `x^μ`; multiplying by that series is a strided prefix sum, so the whole
/// computation is integer-exact.
pub fn d_coefficients(spec: &IncrementSpec, kmax: usize) -> Vec<i128> {
    let mut d = vec![0i128; kmax + 1];
    d[0] = 1;
    for _ in 0..spec.n() {
        // in-place multiply by 1 + x^μ + x^{2μ} + …: out(k) = in(k) + out(k-μ)
        for k in spec.mu()..=kmax {
            d[k] += d[k - spec.mu()];
        }
    }
    d
}

/// `b_{μ,N}(k) = Σ_{m=k}^N a(m) d_μ(m-k)`, the upper-triangular Toeplitz
/// action of `D_N^μ` on the functional coefficients.
pub fn b_coefficients(spec: &IncrementSpec, func: &FunctionalSpec) -> Result<Vec<f64>> {
    let n_len = spec.functional_len();
    if func.coeffs().len() != n_len {
        return Err(Error::DimensionMismatch {
            expected: n_len,
            got: func.coeffs().len(),
        });
    }
    let d = d_coefficients(spec, spec.gap_end());
    let a = func.coeffs();
    let mut b = vec![0.0; n_len];
    for k in 0..n_len {
        let mut acc = 0.0;
        for m in k..n_len {
            acc += a[m] * d[m - k] as f64;
        }
        b[k] = acc;
    }
    Ok(b)
}

/// `v_{μ,N}(k)` for `k = -μn..-1`, returned with `v[i]` holding the weight
/// at `k = i - μn`.
///
/// The lower summation bound is the least integer ≥ -k/μ and the upper one
/// is `min(⌊(N-k)/μ⌋, n)`.
pub fn v_coefficients(spec: &IncrementSpec, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != spec.functional_len() {
        return Err(Error::DimensionMismatch {
            expected: spec.functional_len(),
            got: b.len(),
        });
    }
    let (n, mu, cap_n) = (spec.n() as i64, spec.mu() as i64, spec.gap_end() as i64);
    let len = spec.boundary_len();
    let mut v = vec![0.0; len];
    for (i, slot) in v.iter_mut().enumerate() {
        let k = i as i64 - len as i64; // k in -μn..-1
        let lo = ceil_div(-k, mu);
        let hi = floor_div(cap_n - k, mu).min(n);
        let mut acc = 0.0;
        for l in lo..=hi {
            let idx = l * mu + k;
            debug_assert!((0..=cap_n).contains(&idx));
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(n as usize, l as usize) as f64 * b[idx as usize];
        }
        *slot = acc;
    }
    Ok(v)
}

/// `a_{μ,N}(m) = Σ_l (-1)^l C(n,l) a(m - μl)` for `m = 0..N+μn`, with `l`
/// ranging over `max(⌈(m-N)/μ⌉, 0) ..= min(⌊m/μ⌋, n)`.
pub fn a_mu_coefficients(spec: &IncrementSpec, func: &FunctionalSpec) -> Result<Vec<f64>> {
    if func.coeffs().len() != spec.functional_len() {
        return Err(Error::DimensionMismatch {
            expected: spec.functional_len(),
            got: func.coeffs().len(),
        });
    }
    let a = func.coeffs();
    let (n, mu, cap_n) = (spec.n() as i64, spec.mu() as i64, spec.gap_end() as i64);
    let dim = spec.system_dim();
    let mut out = vec![0.0; dim];
    for (m, slot) in out.iter_mut().enumerate() {
        let m = m as i64;
        let lo = ceil_div(m - cap_n, mu).max(0);
        let hi = floor_div(m, mu).min(n);
        let mut acc = 0.0;
        for l in lo..=hi {
            let idx = m - mu * l;
            debug_assert!((0..=cap_n).contains(&idx));
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binomial(n as usize, l as usize) as f64 * a[idx as usize];
        }
        *slot = acc;
    }
    Ok(out)
}

/// All coefficient families for one (spec, functional) pair, plus the
/// zero-padded right-hand side `[D_N^μ a_N]_{+μn}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBundle {
    pub d: Vec<i128>,
    pub b: Vec<f64>,
    /// `v[i]` is the weight at `k = i - μn`.
    pub v: Vec<f64>,
    pub a_mu: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl CoefficientBundle {
    pub fn new(spec: &IncrementSpec, func: &FunctionalSpec) -> Result<Self> {
        let d = d_coefficients(spec, spec.gap_end());
        let b = b_coefficients(spec, func)?;
        let v = v_coefficients(spec, &b)?;
        let a_mu = a_mu_coefficients(spec, func)?;
        let mut rhs = vec![0.0; spec.system_dim()];
        rhs[..b.len()].copy_from_slice(&b);
        Ok(Self {
            d,
            b,
            v,
            a_mu,
            rhs,
        })
    }

    /// Boundary weight at raw index `k` in `-μn..-1` (the estimate carries
    /// `-v(k)` on ζ(k)).
    pub fn v_at(&self, k: i64) -> f64 {
        let len = self.v.len() as i64;
        debug_assert!(k >= -len && k < 0);
        self.v[(k + len) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, mu: usize, gap_end: usize) -> IncrementSpec {
        IncrementSpec::new(n, mu, gap_end).unwrap()
    }

    /// Brute-force oracle: multiply out `(1 + x^μ + x^{2μ} + …)^n` as plain
    /// polynomials, truncated at kmax.
    fn d_oracle(n: usize, mu: usize, kmax: usize) -> Vec<i128> {
        let mut geom = vec![0i128; kmax + 1];
        for j in (0..=kmax).step_by(mu) {
            geom[j] = 1;
        }
        let mut acc = vec![0i128; kmax + 1];
        acc[0] = 1;
        for _ in 0..n {
            let mut next = vec![0i128; kmax + 1];
            for (i, &ai) in acc.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &gj) in geom.iter().take(kmax + 1 - i).enumerate() {
                    next[i + j] += ai * gj;
                }
            }
            acc = next;
        }
        acc
    }

    #[test]
    fn d_first_order_step_one_is_all_ones() {
        assert_eq!(d_coefficients(&spec(1, 1, 0), 4), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn d_second_order_step_one_counts_up() {
        assert_eq!(d_coefficients(&spec(2, 1, 0), 3), vec![1, 2, 3, 4]);
    }

    #[test]
    fn d_step_two_skips_odd_powers() {
        assert_eq!(d_coefficients(&spec(1, 2, 0), 4), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn d_matches_brute_force_for_n2_mu2() {
        // frozen from the polynomial-multiplication oracle
        let expected = d_oracle(2, 2, 6);
        assert_eq!(expected, vec![1, 0, 2, 0, 3, 0, 4]);
        assert_eq!(d_coefficients(&spec(2, 2, 0), 6), expected);
    }

    #[test]
    fn b_matches_worked_case() {
        // n=1, μ=1, N=1, a=(2,1): D a = (3,1)
        let s = spec(1, 1, 1);
        let f = FunctionalSpec::new(&s, vec![2.0, 1.0]).unwrap();
        assert_eq!(b_coefficients(&s, &f).unwrap(), vec![3.0, 1.0]);
    }

    #[test]
    fn zero_functional_maps_to_zero_everywhere() {
        let s = spec(2, 2, 1);
        let f = FunctionalSpec::new(&s, vec![0.0, 0.0]).unwrap();
        assert!(f.is_zero());
        let bundle = CoefficientBundle::new(&s, &f).unwrap();
        assert!(bundle.b.iter().all(|&x| x == 0.0));
        assert!(bundle.v.iter().all(|&x| x == 0.0));
        assert!(bundle.a_mu.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn b_second_order_direct_sum() {
        // n=2, μ=1, N=2, a=(1,1,1), d=(1,2,3): frozen from direct summation
        let s = spec(2, 1, 2);
        let f = FunctionalSpec::new(&s, vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(b_coefficients(&s, &f).unwrap(), vec![6.0, 3.0, 1.0]);
    }

    #[test]
    fn v_first_order_single_boundary_weight() {
        // n=1, μ=1, N=1, b=(3,1): v(-1) = -b(0) = -3 by direct evaluation
        let s = spec(1, 1, 1);
        let v = v_coefficients(&s, &[3.0, 1.0]).unwrap();
        assert_eq!(v, vec![-3.0]);
    }

    #[test]
    fn v_step_two() {
        // n=1, μ=2, N=1, b=(3,1): only l=1 contributes;
        // v(-2) = -b(0) = -3, v(-1) = -b(1) = -1
        let s = spec(1, 2, 1);
        let v = v_coefficients(&s, &[3.0, 1.0]).unwrap();
        assert_eq!(v, vec![-3.0, -1.0]);
    }

    #[test]
    fn v_zero_input() {
        let s = spec(2, 1, 1);
        assert_eq!(v_coefficients(&s, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn a_mu_worked_case() {
        let s = spec(1, 1, 1);
        let f = FunctionalSpec::new(&s, vec![2.0, 1.0]).unwrap();
        assert_eq!(a_mu_coefficients(&s, &f).unwrap(), vec![2.0, -1.0, -1.0]);
    }

    #[test]
    fn a_mu_step_two() {
        let s = spec(1, 2, 1);
        let f = FunctionalSpec::new(&s, vec![2.0, 1.0]).unwrap();
        assert_eq!(
            a_mu_coefficients(&s, &f).unwrap(),
            vec![2.0, 1.0, -2.0, -1.0]
        );
    }

    #[test]
    fn rhs_is_padded_b() {
        let s = spec(1, 2, 1);
        let f = FunctionalSpec::new(&s, vec![2.0, 1.0]).unwrap();
        let bundle = CoefficientBundle::new(&s, &f).unwrap();
        // d_2 = (1, 0) so b = (2, 1), padded by μn = 2 zeros
        assert_eq!(bundle.rhs, vec![2.0, 1.0, 0.0, 0.0]);
        assert_eq!(bundle.v_at(-2), -2.0);
        assert_eq!(bundle.v_at(-1), -1.0);
    }

    #[test]
    fn functional_validation() {
        let s = spec(1, 1, 1);
        assert!(matches!(
            FunctionalSpec::new(&s, vec![1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(FunctionalSpec::point(&s, 2).is_err());
    }

    #[test]
    fn degenerate_gap_n0() {
        // N=0 must reduce consistently: single functional coefficient
        let s = spec(2, 1, 0);
        let f = FunctionalSpec::new(&s, vec![5.0]).unwrap();
        let bundle = CoefficientBundle::new(&s, &f).unwrap();
        assert_eq!(bundle.b, vec![5.0]);
        // v(k) = Σ_l (-1)^l C(2,l) b(l+k) on k=-2..-1 with b supported on {0}
        assert_eq!(bundle.v, vec![5.0, -10.0]);
        assert_eq!(bundle.a_mu, vec![5.0, -10.0, 5.0]);
    }

    proptest! {
        /// Signed-binomial deconvolution: Σ_l (-1)^l C(n,l) d(k-lμ) = [k=0].
        #[test]
        fn d_deconvolution_identity(n in 1usize..4, mu in 1usize..4, kmax in 0usize..40) {
            let s = spec(n, mu, 0);
            let d = d_coefficients(&s, kmax);
            for k in 0..=kmax {
                let mut acc: i128 = 0;
                for l in 0..=n {
                    if k >= l * mu {
                        let sign = if l % 2 == 0 { 1 } else { -1 };
                        acc += sign * binomial(n, l) * d[k - l * mu];
                    }
                }
                prop_assert_eq!(acc, i128::from(k == 0));
            }
        }

        /// b equals the dense upper-triangular Toeplitz matrix-vector product.
        #[test]
        fn b_matches_matrix_form(
            n in 1usize..4,
            mu in 1usize..4,
            a in proptest::collection::vec(-10i32..10, 1..8),
        ) {
            let gap_end = a.len() - 1;
            let s = spec(n, mu, gap_end);
            let mut coeffs: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            if coeffs.iter().all(|&c| c == 0.0) {
                coeffs[0] = 1.0;
            }
            let f = FunctionalSpec::new(&s, coeffs.clone()).unwrap();
            let b = b_coefficients(&s, &f).unwrap();
            let d = d_coefficients(&s, gap_end);
            // dense matrix: (D)_{k,j} = d(j-k) for j >= k
            for k in 0..=gap_end {
                let mut acc = 0.0;
                for j in k..=gap_end {
                    acc += d[j - k] as f64 * coeffs[j];
                }
                prop_assert_eq!(acc, b[k]); // exact: integer-valued f64 ops
            }
        }

        /// a_mu equals convolution of the zero-extended functional with the
        /// signed binomial pattern at lags μl.
        #[test]
        fn a_mu_matches_convolution(
            n in 1usize..4,
            mu in 1usize..4,
            a in proptest::collection::vec(-10i32..10, 1..8),
        ) {
            let gap_end = a.len() - 1;
            let s = spec(n, mu, gap_end);
            let mut coeffs: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            if coeffs.iter().all(|&c| c == 0.0) {
                coeffs[0] = 1.0;
            }
            let f = FunctionalSpec::new(&s, coeffs.clone()).unwrap();
            let a_mu = a_mu_coefficients(&s, &f).unwrap();
            let dim = s.system_dim();
            let mut ext = vec![0.0; dim];
            ext[..coeffs.len()].copy_from_slice(&coeffs);
            for m in 0..dim {
                let mut acc = 0.0;
                for l in 0..=n {
                    if m >= l * mu {
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        acc += sign * binomial(n, l) as f64 * ext[m - l * mu];
                    }
                }
                prop_assert_eq!(acc, a_mu[m]);
            }
        }

        /// v is the restriction of the same signed convolution of b to the
        /// negative indices -μn..-1.
        #[test]
        fn v_matches_convolution(
            n in 1usize..4,
            mu in 1usize..4,
            b in proptest::collection::vec(-10i32..10, 1..8),
        ) {
            let gap_end = b.len() - 1;
            let s = spec(n, mu, gap_end);
            let bf: Vec<f64> = b.iter().map(|&x| x as f64).collect();
            let v = v_coefficients(&s, &bf).unwrap();
            for k in -(s.boundary_len() as i64)..0 {
                let mut acc = 0.0;
                for l in 0..=(n as i64) {
                    let idx = l * mu as i64 + k;
                    if (0..=gap_end as i64).contains(&idx) {
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        acc += sign * binomial(n, l as usize) as f64 * bf[idx as usize];
                    }
                }
                prop_assert_eq!(acc, v[(k + s.boundary_len() as i64) as usize]);
            }
        }
    }
}
