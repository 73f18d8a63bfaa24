//! Eigensolvers: implicit-shift QL for real symmetric tridiagonal matrices
//! and cyclic Jacobi for dense complex Hermitian matrices.
//!
//! Both solvers are self-contained; at the sizes this crate works with
//! (representation matrices m ≤ ~50, full operators n ≤ ~2000 tridiagonal)
//! they are accurate to close to machine precision, which the separation
//! bound checks downstream rely on.

use num_complex::Complex64;

use super::matrix::{CMatrix, CVector};
use super::tolerance::ToleranceProfile;
use super::{EigenDecomposition, LinalgError, Orthonormality};

/// Implicit-shift QL iteration on a symmetric tridiagonal matrix.
///
/// `d` (length n) and `e` (length n, last entry scratch) are overwritten;
/// on success `d` holds unordered eigenvalues. Every applied plane rotation
/// is reported through `rotate(i, c, s)`, which must combine columns
/// `(i, i+1)` of any accumulated matrix as
/// `(q_i, q_{i+1}) ← (c·q_i − s·q_{i+1}, s·q_i + c·q_{i+1})`.
fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    iter_cap: usize,
    deflate_abs: f64,
    mut rotate: impl FnMut(usize, f64, f64),
) -> Result<(), LinalgError> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            // Look for a negligible off-diagonal entry to split at.
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= deflate_abs || e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > iter_cap {
                return Err(LinalgError::NoConvergence { cap: iter_cap });
            }
            // Wilkinson-style shift from the top 2×2 of the active block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate(i, c, s);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn frobenius_tridiag(diag: &[f64], offdiag: &[f64]) -> f64 {
    let s: f64 = diag.iter().map(|x| x * x).sum::<f64>()
        + 2.0 * offdiag.iter().map(|x| x * x).sum::<f64>();
    s.sqrt()
}

fn ascending_permutation(values: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..values.len()).collect();
    perm.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    perm
}

/// Eigendecomposition of a symmetric tridiagonal matrix with full
/// eigenvector accumulation. Zero off-diagonal entries are allowed (the
/// matrix splits); eigenvalues come back ascending.
pub(crate) fn tridiag_eig_general(
    diag: &[f64],
    offdiag: &[f64],
    tol: &ToleranceProfile,
) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    let n = diag.len();
    if offdiag.len() + 1 != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n.saturating_sub(1),
            got: offdiag.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // Real eigenvector accumulation, column-major.
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let deflate = tol.eig_tol * frobenius_tridiag(diag, offdiag);
    ql_implicit(&mut d, &mut e, tol.eig_sweep_cap, deflate, |i, c, s| {
        let (lo, hi) = q.split_at_mut((i + 1) * n);
        let qi = &mut lo[i * n..];
        let qi1 = &mut hi[..n];
        for k in 0..n {
            let f = qi[k];
            let g = qi1[k];
            qi[k] = c * f - s * g;
            qi1[k] = s * f + c * g;
        }
    })?;
    let perm = ascending_permutation(&d);
    let eigenvalues: Vec<f64> = perm.iter().map(|&j| d[j]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (jnew, &jold) in perm.iter().enumerate() {
        for i in 0..n {
            vectors[(i, jnew)] = Complex64::new(q[jold * n + i], 0.0);
        }
    }
    Ok((eigenvalues, vectors))
}

/// Eigenvalues of a symmetric tridiagonal matrix together with the
/// projections `w_j = q_jᵀ u` of a given complex vector onto the
/// eigenvectors, without forming the eigenvector matrix.
pub(crate) fn tridiag_eig_project(
    diag: &[f64],
    offdiag: &[f64],
    u: &[Complex64],
    tol: &ToleranceProfile,
) -> Result<(Vec<f64>, CVector), LinalgError> {
    let n = diag.len();
    if offdiag.len() + 1 != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n.saturating_sub(1),
            got: offdiag.len(),
        });
    }
    if u.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: u.len() });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // Maintain w = Qᵀu under column rotations Q ← Q·G: w ← Gᵀw.
    let mut w: CVector = u.to_vec();
    let deflate = tol.eig_tol * frobenius_tridiag(diag, offdiag);
    ql_implicit(&mut d, &mut e, tol.eig_sweep_cap, deflate, |i, c, s| {
        let f = w[i];
        let g = w[i + 1];
        w[i] = c * f - s * g;
        w[i + 1] = s * f + c * g;
    })?;
    let perm = ascending_permutation(&d);
    let eigenvalues: Vec<f64> = perm.iter().map(|&j| d[j]).collect();
    let coeffs: CVector = perm.iter().map(|&j| w[j]).collect();
    Ok((eigenvalues, coeffs))
}

/// Eigendecomposition of an unreduced symmetric tridiagonal matrix.
///
/// Ascending eigenvalues with Euclidean-orthonormal eigenvectors. The
/// off-diagonal entries must be strictly positive (an unreduced matrix has
/// simple eigenvalues, which downstream quadrature extraction relies on).
///
/// # Errors
/// `NonpositiveOffdiagonal` if any off-diagonal entry is ≤ 0;
/// `NoConvergence` if the QL iteration cap is exceeded.
pub fn tridiag_eig(
    diag: &[f64],
    offdiag: &[f64],
    tol: &ToleranceProfile,
) -> Result<EigenDecomposition, LinalgError> {
    for (index, &value) in offdiag.iter().enumerate() {
        if value <= 0.0 {
            return Err(LinalgError::NonpositiveOffdiagonal { index, value });
        }
    }
    let (eigenvalues, eigenvectors) = tridiag_eig_general(diag, offdiag, tol)?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        orthonormality: Orthonormality::Euclidean,
    })
}

fn offdiagonal_mass(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigendecomposition of a dense complex Hermitian matrix by cyclic Jacobi
/// sweeps with unitary plane rotations.
///
/// Ascending real eigenvalues with Euclidean-orthonormal (complex)
/// eigenvectors.
///
/// # Errors
/// `NotHermitian` if the input exceeds the relative Hermitian-defect
/// tolerance; `NoConvergence` if the sweep cap is exceeded.
pub fn hermitian_eig(h: &CMatrix, tol: &ToleranceProfile) -> Result<EigenDecomposition, LinalgError> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, got: h.ncols() });
    }
    let scale = h.norm_fro();
    let defect = h.hermitian_defect();
    if defect > tol.hermitian_check * scale.max(f64::MIN_POSITIVE) {
        return Err(LinalgError::NotHermitian {
            defect: defect / scale.max(f64::MIN_POSITIVE),
            tol: tol.hermitian_check,
        });
    }

    let mut a = h.clone();
    a.hermitize();
    let mut v = CMatrix::identity(n);
    let target = tol.eig_tol * scale;
    let sweep_cap = tol.eig_sweep_cap * n.max(1);
    let mut sweep = 0usize;
    while offdiagonal_mass(&a) > target {
        sweep += 1;
        if sweep > sweep_cap {
            return Err(LinalgError::NoConvergence { cap: sweep_cap });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let habs = apq.norm();
                if habs <= f64::MIN_POSITIVE {
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                // Absorb the phase so a real rotation angle applies:
                // with apq = |apq|·e^{iφ}, the unitary rotation is
                // R = [[c, s], [−s·e^{−iφ}, c·e^{−iφ}]].
                let phase = apq / habs;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * habs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_col = s * phase.conj();
                // Columns: A ← A·R and V ← V·R.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s_col * akq;
                    a[(k, q)] = s * akp + c * phase.conj() * akq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s_col * vkq;
                    v[(k, q)] = s * vkp + c * phase.conj() * vkq;
                }
                // Rows: A ← Rᴴ·A.
                let s_row = s * phase;
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s_row * aqk;
                    a[(q, k)] = s * apk + c * phase * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
            }
        }
    }

    let raw: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let perm = ascending_permutation(&raw);
    let eigenvalues: Vec<f64> = perm.iter().map(|&j| raw[j]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (jnew, &jold) in perm.iter().enumerate() {
        eigenvectors.column_mut(jnew).copy_from_slice(v.column(jold));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        orthonormality: Orthonormality::Euclidean,
    })
}
