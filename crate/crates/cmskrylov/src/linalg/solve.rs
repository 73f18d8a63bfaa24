//! Complex linear solves: LU factorizations with partial pivoting for
//! tridiagonal and dense systems, plus a Cholesky factorization used to
//! certify that a metric is positive definite.

use num_complex::Complex64;

use super::matrix::{CMatrix, CVector};
use super::LinalgError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// LU factorization of a (general) complex tridiagonal matrix with partial
/// pivoting, following the classical banded elimination with one fill-in
/// superdiagonal.
pub struct TridiagFactor {
    n: usize,
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagFactor {
    /// Factors the matrix with subdiagonal `dl`, diagonal `d` and
    /// superdiagonal `du` (lengths n−1, n, n−1).
    ///
    /// # Errors
    /// `Singular` when a pivot magnitude falls below `n·ε·max|entry|`.
    pub fn new(dl: &[Complex64], d: &[Complex64], du: &[Complex64]) -> Result<Self, LinalgError> {
        let n = d.len();
        assert!(n >= 1, "empty system");
        assert_eq!(dl.len() + 1, n, "subdiagonal length mismatch");
        assert_eq!(du.len() + 1, n, "superdiagonal length mismatch");
        let max_abs = d
            .iter()
            .chain(dl.iter())
            .chain(du.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let floor = f64::EPSILON * max_abs * n as f64;

        let mut dl = dl.to_vec();
        let mut d = d.to_vec();
        let mut du = du.to_vec();
        let mut du2 = vec![ZERO; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                // No interchange.
                if d[i].norm() > 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for (step, pivot) in d.iter().enumerate() {
            if pivot.norm() <= floor {
                return Err(LinalgError::Singular {
                    step,
                    pivot: pivot.norm(),
                    threshold: floor,
                });
            }
        }
        Ok(TridiagFactor { n, dl, d, du, du2, swapped })
    }

    /// Solves the factored system for one right-hand side.
    pub fn solve(&self, b: &[Complex64]) -> CVector {
        assert_eq!(b.len(), self.n, "right-hand side length mismatch");
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = x[i];
                x[i] = x[i + 1];
                x[i + 1] = temp - self.dl[i] * x[i];
            } else {
                let xi = x[i];
                x[i + 1] -= self.dl[i] * xi;
            }
        }
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

/// Dense complex LU factorization with partial pivoting.
pub struct DenseLu {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl DenseLu {
    /// Factors a square dense matrix.
    ///
    /// # Errors
    /// `Singular` when a pivot magnitude falls below `n·ε·max|entry|`.
    pub fn new(a: &CMatrix) -> Result<Self, LinalgError> {
        let n = a.nrows();
        assert_eq!(a.ncols(), n, "matrix must be square");
        let floor = f64::EPSILON * a.max_abs() * n as f64;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Pivot search in column k.
            let mut piv = k;
            let mut piv_mag = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let mag = lu[(i, k)].norm();
                if mag > piv_mag {
                    piv = i;
                    piv_mag = mag;
                }
            }
            if piv_mag <= floor {
                return Err(LinalgError::Singular {
                    step: k,
                    pivot: piv_mag,
                    threshold: floor,
                });
            }
            if piv != k {
                perm.swap(k, piv);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let mult = lu[(i, k)] / pivot;
                lu[(i, k)] = mult;
                for j in (k + 1)..n {
                    let lkj = lu[(k, j)];
                    lu[(i, j)] -= mult * lkj;
                }
            }
        }
        Ok(DenseLu { lu, perm })
    }

    /// Solves the factored system for one right-hand side.
    pub fn solve(&self, b: &[Complex64]) -> CVector {
        let n = self.lu.nrows();
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let mut x: CVector = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for k in 0..i {
                let xk = x[k];
                x[i] -= self.lu[(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let xk = x[k];
                x[i] -= self.lu[(i, k)] * xk;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }
}

/// Cholesky factorization `M = L Lᴴ` of a Hermitian positive definite
/// matrix; returns the lower factor.
///
/// # Errors
/// `NotPositiveDefinite` with the failing pivot when `M` is not PD.
pub fn cholesky_lower(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let n = m.nrows();
    assert_eq!(m.ncols(), n, "matrix must be square");
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut sum = m[(j, j)].re;
        for k in 0..j {
            sum -= l[(j, k)].norm_sqr();
        }
        if sum <= 0.0 || !sum.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot: sum });
        }
        let ljj = sum.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// In-place forward substitution `L x = b` for lower-triangular `L`.
pub fn forward_substitute(l: &CMatrix, x: &mut [Complex64]) {
    let n = l.nrows();
    assert_eq!(x.len(), n);
    for i in 0..n {
        for k in 0..i {
            let xk = x[k];
            x[i] -= l[(i, k)] * xk;
        }
        x[i] /= l[(i, i)];
    }
}

/// In-place backward substitution `Lᴴ x = b` for lower-triangular `L`.
pub fn adjoint_backward_substitute(l: &CMatrix, x: &mut [Complex64]) {
    let n = l.nrows();
    assert_eq!(x.len(), n);
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            let xk = x[k];
            x[i] -= l[(k, i)].conj() * xk;
        }
        x[i] /= l[(i, i)].conj();
    }
}

/// Triangular matrix-vector product `Lᴴ x`.
pub fn lower_adjoint_matvec(l: &CMatrix, x: &[Complex64]) -> CVector {
    let n = l.nrows();
    assert_eq!(x.len(), n);
    let mut y = vec![ZERO; n];
    for i in 0..n {
        for k in i..n {
            y[i] += l[(k, i)].conj() * x[k];
        }
    }
    y
}
