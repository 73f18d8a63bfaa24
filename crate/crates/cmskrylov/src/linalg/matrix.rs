//! Dense complex matrices (column-major) and complex vector helpers.
//!
//! Everything in this crate works over `Complex64`; real inputs are promoted
//! on entry. Matrices stay small (representation matrices are m ≤ ~50,
//! dense operators a few hundred rows), so a simple contiguous layout with
//! straightforward loops is all that is needed.

use num_complex::Complex64;

/// Column vector of complex entries.
pub type CVector = Vec<Complex64>;

/// Dense complex matrix in column-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMatrix {
            nrows,
            ncols,
            data: vec![Complex64::new(0.0, 0.0); nrows * ncols],
        }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = Complex64::new(1.0, 0.0);
        }
        a
    }

    /// Builds a matrix from its columns; all columns must share one length.
    ///
    /// # Panics
    /// Panics if the columns have inconsistent lengths.
    pub fn from_columns(cols: &[CVector]) -> Self {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        let mut a = CMatrix::zeros(nrows, ncols);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), nrows, "column {j} has inconsistent length");
            a.column_mut(j).copy_from_slice(col);
        }
        a
    }

    /// Builds an `n×n` matrix from a row-major closure.
    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut a = CMatrix::zeros(nrows, ncols);
        for j in 0..ncols {
            for i in 0..nrows {
                a[(i, j)] = f(i, j);
            }
        }
        a
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Immutable view of column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Mutable view of column `j`.
    pub fn column_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Copy of column `j` as an owned vector.
    pub fn column_vec(&self, j: usize) -> CVector {
        self.column(j).to_vec()
    }

    /// Matrix-vector product `A x`.
    ///
    /// # Panics
    /// Panics if `x.len() != self.ncols()`.
    pub fn matvec(&self, x: &[Complex64]) -> CVector {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (yi, &aij) in y.iter_mut().zip(self.column(j)) {
                *yi += aij * xj;
            }
        }
        y
    }

    /// Matrix-matrix product `A B`.
    pub fn matmul(&self, b: &CMatrix) -> CMatrix {
        assert_eq!(self.ncols, b.nrows, "matmul dimension mismatch");
        let mut c = CMatrix::zeros(self.nrows, b.ncols);
        for j in 0..b.ncols {
            let cj = c.column_mut(j);
            for k in 0..self.ncols {
                let bkj = b[(k, j)];
                if bkj == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (ci, &aik) in cj.iter_mut().zip(self.column(k)) {
                    *ci += aik * bkj;
                }
            }
        }
        c
    }

    /// Conjugate transpose `Aᴴ`.
    pub fn adjoint(&self) -> CMatrix {
        let mut at = CMatrix::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                at[(j, i)] = self[(i, j)].conj();
            }
        }
        at
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm of the anti-Hermitian part, `‖A − Aᴴ‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        let mut s = 0.0;
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Replaces `A` by its Hermitian part `(A + Aᴴ)/2`.
    pub fn hermitize(&mut self) {
        assert_eq!(self.nrows, self.ncols);
        for j in 0..self.ncols {
            for i in 0..=j {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    /// Entrywise difference `A − B`.
    pub fn sub(&self, b: &CMatrix) -> CMatrix {
        assert_eq!((self.nrows, self.ncols), (b.nrows, b.ncols));
        let mut c = self.clone();
        for (ci, bi) in c.data.iter_mut().zip(&b.data) {
            *ci -= bi;
        }
        c
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.nrows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.nrows + i]
    }
}

/// Euclidean inner product `xᴴ y` (conjugate-linear in the first argument).
pub fn vdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len(), "vdot dimension mismatch");
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm `‖x‖₂`.
pub fn vnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// In-place update `y ← y + a·x`.
pub fn vaxpy(a: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    assert_eq!(x.len(), y.len(), "vaxpy dimension mismatch");
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// In-place scaling `x ← a·x`.
pub fn vscale(a: Complex64, x: &mut [Complex64]) {
    for xi in x.iter_mut() {
        *xi *= a;
    }
}

/// Promotes a real vector to a complex one.
pub fn vcomplex(x: &[f64]) -> CVector {
    x.iter().map(|&r| Complex64::new(r, 0.0)).collect()
}
