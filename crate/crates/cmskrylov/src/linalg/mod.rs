//! Dense complex linear algebra under a configurable inner product.
//!
//! Provides the metric-aware building blocks used by the decomposition and
//! quadrature layers: the [`InnerProduct`] type (identity or dense Hermitian
//! positive definite metric `M`), self-adjoint operators, symmetric
//! eigensolvers, shifted linear solves `(A − sI)x = b`, matrix generation and
//! Matrix Market ingestion.

pub mod eig;
pub mod matrix;
pub mod mtx;
pub mod solve;
pub mod tolerance;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256StarStar;

pub use eig::{hermitian_eig, tridiag_eig};
pub use matrix::{vaxpy, vdot, vnorm, vscale, CMatrix, CVector};
pub use mtx::read_matrix_market;
pub use solve::{cholesky_lower, DenseLu, TridiagFactor};
pub use tolerance::ToleranceProfile;

/// Errors from the linear-algebra layer.
#[derive(Debug, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("operator is not self-adjoint under the metric: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotSelfAdjoint { defect: f64, tol: f64 },
    #[error("metric is not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("eigensolver did not converge within the iteration cap {cap}")]
    NoConvergence { cap: usize },
    #[error("singular system: pivot {pivot:.3e} at step {step} is below threshold {threshold:.3e}")]
    Singular { step: usize, pivot: f64, threshold: f64 },
    #[error("solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("off-diagonal entry {value:.3e} at index {index} is not positive")]
    NonpositiveOffdiagonal { index: usize, value: f64 },
    #[error("dimension {got} is below the minimum {min}")]
    TooSmall { min: usize, got: usize },
    #[error("{path}:{line}: {msg}")]
    MatrixMarket { path: String, line: usize, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which inner product a set of vectors is orthonormal against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orthonormality {
    Euclidean,
    MInner,
}

/// Eigenvalues in ascending order with column-orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
    pub orthonormality: Orthonormality,
}

#[derive(Clone, Debug)]
enum Metric {
    Identity,
    Dense {
        m: CMatrix,
        /// Lower Cholesky factor of `M`, kept from the definiteness check.
        chol: CMatrix,
    },
}

/// The inner product `(x,y)_M = xᴴMy` for a Hermitian positive definite
/// metric `M`; the default metric is the identity.
#[derive(Clone, Debug)]
pub struct InnerProduct {
    n: usize,
    metric: Metric,
}

impl InnerProduct {
    /// The Euclidean inner product on dimension `n`.
    pub fn identity(n: usize) -> Self {
        InnerProduct { n, metric: Metric::Identity }
    }

    /// An inner product with a dense metric `M`.
    ///
    /// # Errors
    /// `NotHermitian` when `M ≠ Mᴴ` beyond tolerance; `NotPositiveDefinite`
    /// when the Cholesky factorization hits a nonpositive pivot.
    pub fn dense(m: CMatrix, tol: &ToleranceProfile) -> Result<Self, LinalgError> {
        let n = m.nrows();
        assert_eq!(m.ncols(), n, "metric must be square");
        let defect = m.hermitian_defect();
        let bound = tol.hermitian_check * m.norm_fro().max(1.0);
        if defect > bound {
            return Err(LinalgError::NotHermitian { defect, tol: bound });
        }
        let mut m = m;
        m.hermitize();
        let chol = solve::cholesky_lower(&m)?;
        Ok(InnerProduct { n, metric: Metric::Dense { m, chol } })
    }

    /// Dimension of the underlying space.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Whether the metric is the identity.
    pub fn is_identity(&self) -> bool {
        matches!(self.metric, Metric::Identity)
    }

    /// `(x,y)_M = xᴴMy`, conjugate-linear in the first argument.
    ///
    /// # Panics
    /// When either vector has the wrong dimension.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        assert_eq!(x.len(), self.n, "first argument dimension mismatch");
        assert_eq!(y.len(), self.n, "second argument dimension mismatch");
        match &self.metric {
            Metric::Identity => vdot(x, y),
            Metric::Dense { m, .. } => vdot(x, &m.matvec(y)),
        }
    }

    /// The induced norm `‖x‖_M = √(x,x)_M`.
    pub fn norm(&self, x: &[Complex64]) -> f64 {
        self.inner(x, x).re.max(0.0).sqrt()
    }

    /// The metric applied to a vector, `Mx`.
    pub fn apply_metric(&self, x: &[Complex64]) -> CVector {
        match &self.metric {
            Metric::Identity => x.to_vec(),
            Metric::Dense { m, .. } => m.matvec(x),
        }
    }

    /// Lower Cholesky factor of the metric; `None` for the identity.
    pub fn cholesky(&self) -> Option<&CMatrix> {
        match &self.metric {
            Metric::Identity => None,
            Metric::Dense { chol, .. } => Some(chol),
        }
    }
}

/// `(x,y)_M` for the given inner product.
pub fn m_inner(ip: &InnerProduct, x: &[Complex64], y: &[Complex64]) -> Complex64 {
    ip.inner(x, y)
}

/// Storage for the operator entries.
#[derive(Clone, Debug)]
pub enum OperatorData {
    /// Real symmetric tridiagonal: `diag` (length n) and `offdiag`
    /// (length n−1).
    Tridiagonal { diag: Vec<f64>, offdiag: Vec<f64> },
    Dense(CMatrix),
}

/// An operator that is self-adjoint with respect to an [`InnerProduct`]:
/// `(Ax,y)_M = (x,Ay)_M`.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    data: OperatorData,
    ip: InnerProduct,
}

impl HermitianOperator {
    /// A real symmetric tridiagonal operator under the Euclidean metric.
    ///
    /// # Panics
    /// When `offdiag.len() + 1 != diag.len()`.
    pub fn tridiagonal(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert_eq!(offdiag.len() + 1, diag.len(), "off-diagonal length mismatch");
        let n = diag.len();
        HermitianOperator {
            data: OperatorData::Tridiagonal { diag, offdiag },
            ip: InnerProduct::identity(n),
        }
    }

    /// A real diagonal operator under the Euclidean metric.
    pub fn diagonal(entries: Vec<f64>) -> Self {
        let k = entries.len().saturating_sub(1);
        HermitianOperator::tridiagonal(entries, vec![0.0; k])
    }

    /// A dense operator, checked for self-adjointness under `ip`:
    /// the defect `‖MA − AᴴM‖` must stay below tolerance.
    ///
    /// # Errors
    /// `NotSelfAdjoint` when the check fails.
    pub fn dense(a: CMatrix, ip: InnerProduct, tol: &ToleranceProfile) -> Result<Self, LinalgError> {
        let n = a.nrows();
        assert_eq!(a.ncols(), n, "operator must be square");
        assert_eq!(ip.dim(), n, "metric dimension mismatch");
        let (defect, scale) = if ip.is_identity() {
            (a.hermitian_defect(), a.norm_fro())
        } else {
            let ma = ip.apply_metric_matrix(&a);
            let ah_m = a.adjoint().matmul(&ip.metric_matrix());
            (ma.sub(&ah_m).norm_fro(), ma.norm_fro())
        };
        let bound = tol.hermitian_check * scale.max(1.0);
        if defect > bound {
            return Err(LinalgError::NotSelfAdjoint { defect, tol: bound });
        }
        Ok(HermitianOperator { data: OperatorData::Dense(a), ip })
    }

    /// Builds an operator from a dense matrix, storing it in tridiagonal
    /// form when the entry pattern allows (real tridiagonal entries, exact
    /// zeros elsewhere, identity metric).
    ///
    /// # Errors
    /// `NotSelfAdjoint` when the self-adjointness check fails.
    pub fn from_matrix(a: CMatrix, ip: InnerProduct, tol: &ToleranceProfile) -> Result<Self, LinalgError> {
        let n = a.nrows();
        if ip.is_identity() && is_real_tridiagonal(&a) {
            let checked = HermitianOperator::dense(a, ip, tol)?;
            let a = match checked.data {
                OperatorData::Dense(a) => a,
                OperatorData::Tridiagonal { .. } => unreachable!(),
            };
            let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            let offdiag: Vec<f64> = (0..n.saturating_sub(1))
                .map(|i| 0.5 * (a[(i + 1, i)].re + a[(i, i + 1)].re))
                .collect();
            Ok(HermitianOperator::tridiagonal(diag, offdiag))
        } else {
            HermitianOperator::dense(a, ip, tol)
        }
    }

    /// Reads the operator from a Matrix Market file under the Euclidean
    /// metric.
    ///
    /// # Errors
    /// Parse and I/O errors from the reader; `NotSelfAdjoint` when the
    /// payload is not Hermitian.
    pub fn from_matrix_market(path: &std::path::Path, tol: &ToleranceProfile) -> Result<Self, LinalgError> {
        let a = mtx::read_matrix_market(path)?;
        let n = a.nrows();
        HermitianOperator::from_matrix(a, InnerProduct::identity(n), tol)
    }

    /// Dimension of the operator.
    pub fn dim(&self) -> usize {
        self.ip.dim()
    }

    /// The inner product the operator is self-adjoint against.
    pub fn inner_product(&self) -> &InnerProduct {
        &self.ip
    }

    /// The raw entry storage.
    pub fn data(&self) -> &OperatorData {
        &self.data
    }

    /// Applies the operator to a vector.
    ///
    /// # Panics
    /// When the vector has the wrong dimension.
    pub fn apply(&self, x: &[Complex64]) -> CVector {
        match &self.data {
            OperatorData::Tridiagonal { diag, offdiag } => {
                let n = diag.len();
                assert_eq!(x.len(), n, "vector dimension mismatch");
                let mut y = vec![Complex64::new(0.0, 0.0); n];
                for i in 0..n {
                    let mut acc = diag[i] * x[i];
                    if i > 0 {
                        acc += offdiag[i - 1] * x[i - 1];
                    }
                    if i + 1 < n {
                        acc += offdiag[i] * x[i + 1];
                    }
                    y[i] = acc;
                }
                y
            }
            OperatorData::Dense(a) => a.matvec(x),
        }
    }

    /// Densifies the operator entries.
    pub fn to_dense(&self) -> CMatrix {
        match &self.data {
            OperatorData::Tridiagonal { diag, offdiag } => {
                let n = diag.len();
                CMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        Complex64::new(diag[i], 0.0)
                    } else if i == j + 1 {
                        Complex64::new(offdiag[j], 0.0)
                    } else if j == i + 1 {
                        Complex64::new(offdiag[i], 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            }
            OperatorData::Dense(a) => a.clone(),
        }
    }

    /// An inexpensive upper estimate of `‖A‖₂` (the max row sum).
    pub fn norm_est(&self) -> f64 {
        match &self.data {
            OperatorData::Tridiagonal { diag, offdiag } => {
                let n = diag.len();
                (0..n)
                    .map(|i| {
                        let mut s = diag[i].abs();
                        if i > 0 {
                            s += offdiag[i - 1].abs();
                        }
                        if i + 1 < n {
                            s += offdiag[i].abs();
                        }
                        s
                    })
                    .fold(0.0, f64::max)
            }
            OperatorData::Dense(a) => {
                let n = a.nrows();
                (0..n)
                    .map(|i| (0..n).map(|j| a[(i, j)].norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
        }
    }
}

impl InnerProduct {
    fn metric_matrix(&self) -> CMatrix {
        match &self.metric {
            Metric::Identity => CMatrix::identity(self.n),
            Metric::Dense { m, .. } => m.clone(),
        }
    }

    fn apply_metric_matrix(&self, a: &CMatrix) -> CMatrix {
        match &self.metric {
            Metric::Identity => a.clone(),
            Metric::Dense { m, .. } => m.matmul(a),
        }
    }
}

fn is_real_tridiagonal(a: &CMatrix) -> bool {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            let on_band = i == j || i + 1 == j || j + 1 == i;
            if on_band {
                if v.im != 0.0 {
                    return false;
                }
            } else if v != Complex64::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}

/// The 1D Dirichlet finite-difference Laplacian on `(0,1)` with `n`
/// interior points: tridiagonal with diagonal `2/h²` and off-diagonal
/// `−1/h²` where `h = 1/(n+1)`. Its spectrum is
/// `4 sin²(kπ/(2(n+1)))·(n+1)²` for `k = 1..n`.
///
/// # Errors
/// `TooSmall` when `n < 2`.
pub fn laplacian_1d(n: usize) -> Result<HermitianOperator, LinalgError> {
    if n < 2 {
        return Err(LinalgError::TooSmall { min: 2, got: n });
    }
    let h = 1.0 / (n as f64 + 1.0);
    let scale = 1.0 / (h * h);
    Ok(HermitianOperator::tridiagonal(vec![2.0 * scale; n], vec![-scale; n - 1]))
}

/// Whether `s` lies strictly below the spectrum of the operator, i.e.
/// `A − sI` is positive definite. Decided by the pivots of an `LDLᵀ`
/// sweep for tridiagonal storage and by a Cholesky attempt for dense.
pub fn shift_below_spectrum(op: &HermitianOperator, s: f64) -> bool {
    match op.data() {
        OperatorData::Tridiagonal { diag, offdiag } => {
            let mut d = diag[0] - s;
            if d <= 0.0 {
                return false;
            }
            for i in 1..diag.len() {
                d = (diag[i] - s) - offdiag[i - 1] * offdiag[i - 1] / d;
                if d <= 0.0 {
                    return false;
                }
            }
            true
        }
        OperatorData::Dense(a) => {
            let mut shifted = a.clone();
            for i in 0..a.nrows() {
                shifted[(i, i)] -= Complex64::new(s, 0.0);
            }
            solve::cholesky_lower(&shifted).is_ok()
        }
    }
}

/// A reproducible random vector with independent complex standard normal
/// entries, normalized to unit length in the `ip`-norm.
pub fn random_unit_vector(n: usize, seed: u64, ip: &InnerProduct) -> CVector {
    assert_eq!(ip.dim(), n, "metric dimension mismatch");
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let mut u: CVector = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = ip.norm(&u);
    vscale(Complex64::new(1.0 / norm, 0.0), &mut u);
    u
}

/// A shifted operator `A − sI` with a reusable factorization.
pub struct ShiftedOperator<'a> {
    op: &'a HermitianOperator,
    s: Complex64,
    factor: ShiftedFactor,
    norm: f64,
    residual_tol: f64,
}

enum ShiftedFactor {
    Tridiag(TridiagFactor),
    Dense(DenseLu),
}

impl<'a> ShiftedOperator<'a> {
    /// Factors `A − sI` once for repeated solves.
    ///
    /// # Errors
    /// `Singular` when the shift is (numerically) an eigenvalue of `A`.
    pub fn new(op: &'a HermitianOperator, s: Complex64, tol: &ToleranceProfile) -> Result<Self, LinalgError> {
        let (factor, norm) = match op.data() {
            OperatorData::Tridiagonal { diag, offdiag } => {
                let d: CVector = diag.iter().map(|&v| Complex64::new(v, 0.0) - s).collect();
                let e: CVector = offdiag.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let n = d.len();
                let norm = (0..n)
                    .map(|i| {
                        let left = if i > 0 { e[i - 1].norm() } else { 0.0 };
                        let right = if i + 1 < n { e[i].norm() } else { 0.0 };
                        d[i].norm() + left + right
                    })
                    .fold(0.0f64, f64::max);
                (ShiftedFactor::Tridiag(TridiagFactor::new(&e, &d, &e)?), norm)
            }
            OperatorData::Dense(a) => {
                let mut shifted = a.clone();
                for i in 0..a.nrows() {
                    shifted[(i, i)] -= s;
                }
                let norm = (0..shifted.nrows())
                    .map(|i| (0..shifted.ncols()).map(|j| shifted[(i, j)].norm()).sum())
                    .fold(0.0f64, f64::max);
                (ShiftedFactor::Dense(DenseLu::new(&shifted)?), norm)
            }
        };
        Ok(ShiftedOperator { op, s, factor, norm, residual_tol: tol.solve_residual })
    }

    /// The shift `s`.
    pub fn shift(&self) -> Complex64 {
        self.s
    }

    /// Solves `(A − sI)x = b` and enforces the backward-error bound, the
    /// residual measured against what a backward-stable solver can deliver
    /// at any conditioning.
    ///
    /// # Errors
    /// `ResidualTooLarge` when `‖b − (A−sI)x‖ > tol·(‖A−sI‖·‖x‖ + ‖b‖)`.
    pub fn solve(&self, b: &[Complex64]) -> Result<CVector, LinalgError> {
        let x = match &self.factor {
            ShiftedFactor::Tridiag(f) => f.solve(b),
            ShiftedFactor::Dense(f) => f.solve(b),
        };
        let mut r = self.op.apply(&x);
        for (ri, (xi, bi)) in r.iter_mut().zip(x.iter().zip(b)) {
            *ri = bi - (*ri - self.s * xi);
        }
        let scale = (self.norm * vnorm(&x) + vnorm(b)).max(f64::MIN_POSITIVE);
        let rel = vnorm(&r) / scale;
        if rel > self.residual_tol {
            return Err(LinalgError::ResidualTooLarge { residual: rel, tol: self.residual_tol });
        }
        Ok(x)
    }
}

/// One-shot shifted solve `(A − sI)x = b`; factors, solves, and checks the
/// residual.
///
/// # Errors
/// `Singular` for an eigenvalue shift; `ResidualTooLarge` when the solution
/// fails the residual bound.
pub fn shifted_solve(
    op: &HermitianOperator,
    s: Complex64,
    b: &[Complex64],
    tol: &ToleranceProfile,
) -> Result<CVector, LinalgError> {
    ShiftedOperator::new(op, s, tol)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_inner_product_unit_vector() {
        // (e₁,e₁) = 1 under the identity metric.
        let ip = InnerProduct::identity(3);
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert_eq!(ip.inner(&e1, &e1), c(1.0, 0.0));
    }

    #[test]
    fn diagonal_metric_reads_off_entry() {
        // M = diag(2,3): (e₁,e₁)_M = 2.
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(2.0, 0.0);
        m[(1, 1)] = c(3.0, 0.0);
        let ip = InnerProduct::dense(m, &ToleranceProfile::default()).unwrap();
        let x = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(ip.inner(&x, &x), c(2.0, 0.0));
    }

    #[test]
    fn dense_metric_matches_direct_multiply() {
        // (x,y)_M computed by the type equals the direct xᴴ(My) product and
        // the conjugate of (y,x)_M.
        let n = 5;
        let b = CMatrix::from_fn(n, n, |i, j| c(((i * 2 + j) % 5) as f64 / 3.0, ((i + 3 * j) % 7) as f64 / 4.0));
        let mut spd = b.adjoint().matmul(&b);
        for i in 0..n {
            spd[(i, i)] += c(1.0, 0.0);
        }
        let ip = InnerProduct::dense(spd.clone(), &ToleranceProfile::default()).unwrap();
        let x: CVector = (0..n).map(|i| c((i as f64).sin(), (i as f64 / 2.0).cos())).collect();
        let y: CVector = (0..n).map(|i| c((i as f64).cos(), -(i as f64))).collect();
        let direct = vdot(&x, &spd.matvec(&y));
        assert!((ip.inner(&x, &y) - direct).norm() < 1e-13);
        assert!((ip.inner(&x, &y) - ip.inner(&y, &x).conj()).norm() < 1e-13);
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let mut m = CMatrix::identity(3);
        m[(2, 2)] = c(-0.5, 0.0);
        assert!(matches!(
            InnerProduct::dense(m, &ToleranceProfile::default()),
            Err(LinalgError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn non_hermitian_metric_is_rejected() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            InnerProduct::dense(m, &ToleranceProfile::default()),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn laplacian_smallest_case_closed_form() {
        // n=2, h=1/3: diag 18, off −9, eigenvalues 9 and 27.
        let op = laplacian_1d(2).unwrap();
        let tol = ToleranceProfile::default();
        match op.data() {
            OperatorData::Tridiagonal { diag, offdiag } => {
                assert!((diag[0] - 18.0).abs() < 1e-12);
                assert!((offdiag[0] + 9.0).abs() < 1e-12);
            }
            OperatorData::Dense(_) => panic!("expected tridiagonal storage"),
        }
        let dense = op.to_dense();
        let eig = hermitian_eig(&dense, &tol).unwrap();
        assert!((eig.eigenvalues[0] - 9.0).abs() < 1e-10);
        assert!((eig.eigenvalues[1] - 27.0).abs() < 1e-10);
    }

    #[test]
    fn laplacian_eigenvalues_match_analytic_form() {
        // 4 sin²(kπ/(2(n+1)))·(n+1)² for n = 100, to 1e−8 relative.
        let n = 100;
        let op = laplacian_1d(n).unwrap();
        let tol = ToleranceProfile::default();
        let (diag, offdiag) = match op.data() {
            OperatorData::Tridiagonal { diag, offdiag } => (diag.clone(), offdiag.clone()),
            OperatorData::Dense(_) => panic!("expected tridiagonal storage"),
        };
        // tridiag_eig wants positive off-diagonals; flipping signs of
        // alternate basis vectors makes the spectrum invariant.
        let flipped: Vec<f64> = offdiag.iter().map(|v| v.abs()).collect();
        let eig = tridiag_eig(&diag, &flipped, &tol).unwrap();
        let np1 = (n + 1) as f64;
        for (k, lam) in eig.eigenvalues.iter().enumerate() {
            let analytic = 4.0 * ((k as f64 + 1.0) * std::f64::consts::PI / (2.0 * np1)).sin().powi(2) * np1 * np1;
            assert!(
                (lam - analytic).abs() <= 1e-8 * analytic,
                "k={k}: {lam} vs {analytic}"
            );
        }
    }

    #[test]
    fn laplacian_rejects_tiny_dimension() {
        assert!(matches!(laplacian_1d(1), Err(LinalgError::TooSmall { min: 2, got: 1 })));
    }

    #[test]
    fn shifted_solve_diagonal_inverse() {
        // diag(1,2,3), s = 0, b = ones → (1, 1/2, 1/3).
        let op = HermitianOperator::diagonal(vec![1.0, 2.0, 3.0]);
        let tol = ToleranceProfile::default();
        let b = vec![c(1.0, 0.0); 3];
        let x = shifted_solve(&op, c(0.0, 0.0), &b, &tol).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - c(0.5, 0.0)).norm() < 1e-14);
        assert!((x[2] - c(1.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn shifted_solve_enforces_residual() {
        let op = laplacian_1d(5).unwrap();
        let tol = ToleranceProfile::default();
        let mut b = vec![c(0.0, 0.0); 5];
        b[0] = c(1.0, 0.0);
        let x = shifted_solve(&op, c(-1.0, 0.0), &b, &tol).unwrap();
        let mut r = op.apply(&x);
        for (ri, (xi, bi)) in r.iter_mut().zip(x.iter().zip(&b)) {
            *ri = bi - (*ri + xi);
        }
        assert!(vnorm(&r) <= 1e-12 * vnorm(&b));
    }

    #[test]
    fn eigenvalue_shift_is_an_error() {
        // The exact smallest eigenvalue of the n=5 operator makes A − sI
        // singular; either the factorization or the residual check trips.
        let op = laplacian_1d(5).unwrap();
        let tol = ToleranceProfile::default();
        let np1 = 6.0_f64;
        let lam1 = 4.0 * (std::f64::consts::PI / (2.0 * np1)).sin().powi(2) * np1 * np1;
        let b = vec![c(1.0, 0.0); 5];
        assert!(shifted_solve(&op, c(lam1, 0.0), &b, &tol).is_err());
    }

    #[test]
    fn random_vector_is_reproducible_and_normalized() {
        let ip = InnerProduct::identity(16);
        let u1 = random_unit_vector(16, 42, &ip);
        let u2 = random_unit_vector(16, 42, &ip);
        let u3 = random_unit_vector(16, 43, &ip);
        assert_eq!(u1, u2);
        assert!(u1 != u3);
        assert!((ip.norm(&u1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_vector_normalizes_in_metric_norm() {
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = c(i as f64 + 1.0, 0.0);
        }
        let ip = InnerProduct::dense(m, &ToleranceProfile::default()).unwrap();
        let u = random_unit_vector(4, 7, &ip);
        assert!((ip.norm(&u) - 1.0).abs() < 1e-14);
        // Euclidean norm differs, so the metric actually participated.
        assert!((vnorm(&u) - 1.0).abs() > 1e-3);
    }

    #[test]
    fn self_adjointness_check_involves_the_metric() {
        // A = [[0,1],[1,0]] is Hermitian but not self-adjoint under
        // M = diag(2,3) since MA ≠ AᴴM.
        let a = CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(2.0, 0.0);
        m[(1, 1)] = c(3.0, 0.0);
        let tol = ToleranceProfile::default();
        let ip = InnerProduct::dense(m, &tol).unwrap();
        assert!(matches!(
            HermitianOperator::dense(a.clone(), ip, &tol),
            Err(LinalgError::NotSelfAdjoint { .. })
        ));
        // Under the identity metric the same matrix is accepted.
        let op = HermitianOperator::dense(a, InnerProduct::identity(2), &tol).unwrap();
        assert_eq!(op.dim(), 2);
    }

    #[test]
    fn from_matrix_detects_tridiagonal_storage() {
        let dense = laplacian_1d(6).unwrap().to_dense();
        let tol = ToleranceProfile::default();
        let op = HermitianOperator::from_matrix(dense, InnerProduct::identity(6), &tol).unwrap();
        assert!(matches!(op.data(), OperatorData::Tridiagonal { .. }));
        // A genuinely dense matrix stays dense.
        let full = CMatrix::from_fn(3, 3, |i, j| c((i + j) as f64, 0.0));
        let op2 = HermitianOperator::from_matrix(full, InnerProduct::identity(3), &tol).unwrap();
        assert!(matches!(op2.data(), OperatorData::Dense(_)));
    }

    #[test]
    fn operator_apply_matches_dense_apply() {
        let op = laplacian_1d(9).unwrap();
        let x: CVector = (0..9).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let via_tridiag = op.apply(&x);
        let via_dense = op.to_dense().matvec(&x);
        for i in 0..9 {
            assert!((via_tridiag[i] - via_dense[i]).norm() < 1e-12);
        }
        assert!(op.norm_est() >= 4.0 * 100.0 - 1e-9);
    }
}
