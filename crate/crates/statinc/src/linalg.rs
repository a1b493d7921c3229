//! Dense symmetric linear algebra sized for the small systems this crate
//! produces (dimension N + μn + 1, and oracle Gram matrices of a few
//! hundred at most). The dense Cholesky path is the correctness reference;
//! no Toeplitz fast path is attempted.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{abs, sqrt};
use crate::Result;

/// Dense symmetric matrix, full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Symmetric Toeplitz matrix with entry (l, k) = coeffs[|k - l|].
    pub fn from_toeplitz(coeffs: &[f64], n: usize) -> Self {
        debug_assert!(coeffs.len() >= n);
        let mut m = Self::zeros(n);
        for l in 0..n {
            for k in 0..n {
                m.data[l * n + k] = coeffs[k.abs_diff(l)];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.at(i, i)).sum()
    }

    /// Cholesky factorization A = L Lᵀ.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = self.at(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    condition_estimate: condition_from_pivots(&l, n, j),
                });
            }
            let dsqrt = sqrt(diag);
            l[j * n + j] = dsqrt;
            for i in (j + 1)..n {
                let mut acc = self.at(i, j);
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = acc / dsqrt;
            }
        }
        Ok(Cholesky { n, l })
    }

    /// Solve A x = b by Cholesky with two steps of iterative refinement.
    /// Returns the solution and the final relative residual norm.
    pub fn solve_refined(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let chol = self.cholesky()?;
        let mut x = chol.solve(b);
        let bnorm = norm2(b).max(f64::MIN_POSITIVE);
        let mut res = 0.0;
        for _ in 0..2 {
            let ax = self.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            res = norm2(&r) / bnorm;
            if res < 1e-15 {
                break;
            }
            let dx = chol.solve(&r);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        let ax = self.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        res = res.min(norm2(&r) / bnorm);
        Ok((x, res))
    }

    /// Pivoted Cholesky solve for positive semidefinite Gram systems; fails
    /// with the effective rank when the matrix is numerically singular.
    pub fn solve_pivoted(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.trace().max(f64::MIN_POSITIVE);
        let tol = 1e-13 * scale;
        for j in 0..n {
            // pick the largest remaining diagonal
            let mut best = j;
            for i in (j + 1)..n {
                if a[i * n + i] > a[best * n + best] {
                    best = i;
                }
            }
            if a[best * n + best] <= tol {
                return Err(Error::SingularGram {
                    effective_rank: j,
                    dim: n,
                });
            }
            if best != j {
                swap_sym(&mut a, n, j, best);
                perm.swap(j, best);
            }
            let pivot = sqrt(a[j * n + j]);
            a[j * n + j] = pivot;
            for i in (j + 1)..n {
                a[i * n + j] /= pivot;
            }
            // full symmetric trailing update: later pivot swaps exchange
            // whole rows/columns, so the active block must stay symmetric
            for k in (j + 1)..n {
                let lkj = a[k * n + j];
                for i in (j + 1)..n {
                    a[k * n + i] -= a[i * n + j] * lkj;
                }
            }
        }
        // solve L Lᵀ y = Pb, then x = Pᵀ y
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[perm[i]];
            for k in 0..i {
                acc -= a[i * n + k] * y[k];
            }
            y[i] = acc / a[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc -= a[k * n + i] * y[k];
            }
            y[i] = acc / a[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[perm[i]] = y[i];
        }
        Ok(x)
    }

    /// Eigenvalues by the cyclic Jacobi method, ascending. Used for
    /// positive-definiteness margins in diagnostics and tests.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.data.clone();
        if n == 1 {
            return vec![a[0]];
        }
        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[p * n + q] * a[p * n + q];
                }
            }
            if off < 1e-30 * (1.0 + self.trace() * self.trace()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if abs(apq) < 1e-300 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + sqrt(1.0 + theta * theta))
                    } else {
                        1.0 / (theta - sqrt(1.0 + theta * theta))
                    };
                    let c = 1.0 / sqrt(1.0 + t * t);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }
}

/// Cholesky factor L (lower triangular, row-major full storage).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for k in 0..i {
                acc -= self.l[i * n + k] * y[k];
            }
            y[i] = acc / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc -= self.l[k * n + i] * y[k];
            }
            y[i] = acc / self.l[i * n + i];
        }
        y
    }

    /// Crude condition estimate from the extreme Cholesky pivots.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let d = self.l[i * n + i];
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            (hi / lo) * (hi / lo)
        }
    }
}

fn condition_from_pivots(l: &[f64], n: usize, upto: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..upto {
        let d = l[i * n + i];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if upto == 0 || lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo) * (hi / lo)
    }
}

fn swap_sym(a: &mut [f64], n: usize, i: usize, j: usize) {
    for k in 0..n {
        a.swap(i * n + k, j * n + k);
    }
    for k in 0..n {
        a.swap(k * n + i, k * n + j);
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for v in x {
        acc += v * v;
    }
    sqrt(acc)
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_worked_inverse() {
        // the 3×3 Toeplitz matrix with first row (5/4, 1/2, 0) has the
        // known inverse (4/85)·[[21,-10,4],[-10,25,-10],[4,-10,21]]
        let m = SymMat::from_toeplitz(&[1.25, 0.5, 0.0], 3);
        let inv_cols = [
            [21.0, -10.0, 4.0],
            [-10.0, 25.0, -10.0],
            [4.0, -10.0, 21.0],
        ];
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            let (x, res) = m.solve_refined(&e).unwrap();
            assert!(res < 1e-14);
            for i in 0..3 {
                assert!((x[i] - inv_cols[i][j] * 4.0 / 85.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut m = SymMat::zeros(2);
        m.set(0, 0, 1.0);
        m.set(1, 1, -1.0);
        assert!(matches!(
            m.cholesky(),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn pivoted_solve_and_rank_detection() {
        let mut m = SymMat::zeros(3);
        m.set(0, 0, 2.0);
        m.set(1, 1, 3.0);
        m.set(2, 2, 4.0);
        m.set(0, 1, 0.5);
        m.set(1, 2, -0.25);
        let b = vec![1.0, 2.0, 3.0];
        let x = m.solve_pivoted(&b).unwrap();
        let ax = m.matvec(&x);
        for (ai, bi) in ax.iter().zip(&b) {
            assert!((ai - bi).abs() < 1e-12);
        }

        // rank-1 matrix
        let mut s = SymMat::zeros(2);
        s.set(0, 0, 1.0);
        s.set(0, 1, 1.0);
        s.set(1, 1, 1.0);
        assert!(matches!(
            s.solve_pivoted(&[1.0, 1.0]),
            Err(Error::SingularGram {
                effective_rank: 1,
                dim: 2
            })
        ));
    }

    #[test]
    fn jacobi_eigenvalues_of_known_matrix() {
        // eigenvalues of [[2,1],[1,2]] are 1 and 3
        let mut m = SymMat::zeros(2);
        m.set(0, 0, 2.0);
        m.set(1, 1, 2.0);
        m.set(0, 1, 1.0);
        let e = m.eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn toeplitz_structure() {
        let m = SymMat::from_toeplitz(&[3.0, 1.0, 0.5, 0.0], 4);
        for l in 0..4 {
            for k in 0..4 {
                assert_eq!(m.at(l, k), [3.0, 1.0, 0.5, 0.0][k.abs_diff(l)]);
                assert_eq!(m.at(l, k), m.at(k, l));
            }
        }
    }
}
