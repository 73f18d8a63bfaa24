//! Quasi-orthogonal-residual representations: small matrices that differ
//! from the usual Rayleigh quotient in a single entry, chosen so that one
//! eigenvalue is preassigned to a value `ξ`.
//!
//! The polynomial variant [`qor_poly`] borders the Jacobi matrix
//! `J_{m−1}` with
//!
//! ```text
//! ω_m = ξ + β²_{m−1} e_{m−1}ᴴ (J_{m−1} − ξI)⁻¹ e_{m−1},
//! ```
//!
//! the unique corner entry that makes `ξ` an eigenvalue of the bordered
//! matrix `T_m`. The rational variant [`qor_rational_sai`] does the same
//! for a shift-and-invert subspace, assembled through an extended two-step
//! construction so the modified starting vector `(A−sI)⁻²u` is never
//! inverted back. Both matrices generate Gauss-Radau-type quadrature rules
//! with a node pinned at `ξ`.
//!
//! The module also provides the function approximants `U_m f(rep) x`,
//! which conserve spectral mass because the representations stay
//! Hermitian.

use num_complex::Complex64;

use crate::krylov::{
    lanczos, sai_complex, sai_real, DecompositionKind, KrylovDecomposition, KrylovError,
};
use crate::linalg::{
    hermitian_eig, tridiag_eig, vaxpy, vdot, vscale, CMatrix, CVector, DenseLu, HermitianOperator,
    InnerProduct, LinalgError, ShiftedOperator, ToleranceProfile, TridiagFactor,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Errors from the function approximants.
#[derive(Debug, thiserror::Error)]
pub enum QorError {
    #[error("function evaluates non-finite at representation eigenvalue {theta}")]
    NonFiniteAtEigenvalue { theta: f64 },
    #[error("decomposition kind {kind:?} is not supported by this approximant")]
    WrongKind { kind: DecompositionKind },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Enforces the guard distance between `ξ` and the predecessor's
/// eigenvalues (ascending); the threshold is relative to their spread.
fn check_guard(xi: f64, eigenvalues: &[f64], tol: &ToleranceProfile) -> Result<(), KrylovError> {
    let spread = eigenvalues.last().unwrap() - eigenvalues.first().unwrap();
    let scale = if spread > 0.0 {
        spread
    } else {
        eigenvalues[0].abs().max(1.0)
    };
    let threshold = tol.qor_guard * scale;
    let distance = eigenvalues
        .iter()
        .map(|t| (t - xi).abs())
        .fold(f64::INFINITY, f64::min);
    if distance < threshold {
        return Err(KrylovError::GuardViolation { xi, distance, threshold });
    }
    Ok(())
}

/// Reads the real tridiagonal entries out of a Jacobi representation.
fn tridiag_entries(rep: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let m = rep.nrows();
    let diag: Vec<f64> = (0..m).map(|i| rep[(i, i)].re).collect();
    let offdiag: Vec<f64> = (0..m.saturating_sub(1)).map(|i| rep[(i, i + 1)].re).collect();
    (diag, offdiag)
}

/// The quasi-orthogonal-residual polynomial decomposition: `m−1` Lanczos
/// steps give `J_{m−1}` and the pair `(v_m, β_{m−1})`; the corner entry
/// `ω_m` is then chosen so that `ξ` becomes an eigenvalue of the bordered
/// tridiagonal matrix `T_m`. `x = β₀e₁`.
///
/// # Errors
/// `GuardViolation` when `ξ` is too close to an eigenvalue of `J_{m−1}`
/// (where `ω_m` has a pole); `LuckyBreakdown` when the subspace is
/// invariant before dimension `m`; `TooSmall` for `m < 2`.
pub fn qor_poly(
    a: &HermitianOperator,
    u: &[Complex64],
    m: usize,
    xi: f64,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    if m < 2 {
        return Err(KrylovError::TooSmall { min: 2, got: m });
    }
    let pre = lanczos(a, u, m - 1, tol)?;
    let (v_m, beta_last) = pre
        .residual
        .clone()
        .ok_or(KrylovError::LuckyBreakdown { step: m - 1 })?;
    let (diag, offdiag) = tridiag_entries(&pre.rep);
    let eig = tridiag_eig_values(&diag, &offdiag, tol)?;
    check_guard(xi, &eig, tol)?;
    let omega = xi + beta_last * beta_last * resolvent_corner(&diag, &offdiag, xi)?;

    let mut full_diag = diag;
    full_diag.push(omega);
    let mut full_off = offdiag;
    full_off.push(beta_last);
    let rep = CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::new(full_diag[i], 0.0)
        } else if i.abs_diff(j) == 1 {
            Complex64::new(full_off[i.min(j)], 0.0)
        } else {
            ZERO
        }
    });

    let mut cols: Vec<CVector> = (0..m - 1).map(|j| pre.basis.column_vec(j)).collect();
    cols.push(v_m);
    let basis = CMatrix::from_columns(&cols);
    let mut x = vec![ZERO; m];
    x[0] = Complex64::new(pre.beta0, 0.0);

    // Quasi-orthogonal residual: r = A v_m − β_{m−1} v_{m−1} − ω_m v_m,
    // so that A V_m = V_m T_m + r e_mᴴ.
    let mut r = a.apply(basis.column(m - 1));
    vaxpy(Complex64::new(-beta_last, 0.0), basis.column(m - 2), &mut r);
    vaxpy(Complex64::new(-omega, 0.0), basis.column(m - 1), &mut r);
    let ip = a.inner_product();
    let rnorm = ip.norm(&r);
    let residual = if rnorm > tol.breakdown * a.norm_est().max(f64::MIN_POSITIVE) {
        vscale(Complex64::new(1.0 / rnorm, 0.0), &mut r);
        Some((r, rnorm))
    } else {
        None
    };
    Ok(KrylovDecomposition {
        basis,
        rep,
        x,
        beta0: pre.beta0,
        residual,
        kind: DecompositionKind::QorPoly { xi },
    })
}

fn tridiag_eig_values(
    diag: &[f64],
    offdiag: &[f64],
    tol: &ToleranceProfile,
) -> Result<Vec<f64>, KrylovError> {
    if diag.len() == 1 {
        return Ok(vec![diag[0]]);
    }
    Ok(tridiag_eig(diag, offdiag, tol)?.eigenvalues)
}

/// `e_kᴴ (J − ξI)⁻¹ e_k` for the last index `k`, via one tridiagonal solve.
fn resolvent_corner(diag: &[f64], offdiag: &[f64], xi: f64) -> Result<f64, KrylovError> {
    let k = diag.len();
    let d: CVector = diag.iter().map(|&v| Complex64::new(v - xi, 0.0)).collect();
    let e: CVector = offdiag.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let factor = TridiagFactor::new(&e, &d, &e)?;
    let mut rhs = vec![ZERO; k];
    rhs[k - 1] = Complex64::new(1.0, 0.0);
    Ok(factor.solve(&rhs)[k - 1].re)
}

/// The quasi-orthogonal-residual decomposition of a shift-and-invert
/// subspace with pole `s` of multiplicity `m−1` and preassigned
/// eigenvalue `ξ`. Built without forming `(A−sI)^{−(m−1)}u`: a size
/// `m−2` shift-and-invert decomposition is grown from the modified
/// starting vector `û = (A−sI)⁻²u`, bridged by `Aû` and `Av_{m−1}`, and
/// the bordered corner entry `ω_m` pins `ξ`. Here `x = (U_m,u)_M` is a
/// general vector (not `β₀e₁`).
///
/// # Errors
/// `TooSmall` for `m < 3`; `GuardViolation` when `ξ` is too close to an
/// eigenvalue of the intermediate representation; solve and breakdown
/// errors from the underlying builders.
pub fn qor_rational_sai(
    a: &HermitianOperator,
    u: &[Complex64],
    m: usize,
    s: Complex64,
    xi: f64,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    if m < 3 {
        return Err(KrylovError::TooSmall { min: 3, got: m });
    }
    let ip = a.inner_product();
    let n = a.dim();
    if m > n {
        return Err(KrylovError::TooManySteps { m, n });
    }
    let beta0 = ip.norm(u);

    // û = X²u with X = (A−sI)⁻¹, then the size m−2 decomposition from û.
    let shifted = ShiftedOperator::new(a, s, tol)?;
    let uhat = shifted.solve(&shifted.solve(u)?)?;
    let sai = if s.im == 0.0 {
        sai_real(a, &uhat, m - 2, s.re, tol)?
    } else {
        sai_complex(a, &uhat, m - 2, s, tol)?
    };

    let mut cols: Vec<CVector> = (0..m - 2).map(|j| sai.basis.column_vec(j)).collect();
    let scale = a.norm_est().max(f64::MIN_POSITIVE);

    // Bridge: v_{m−1} from Aû (û is β̂₀ times the first basis column).
    let mut vtilde = a.apply(&cols[0]);
    mgs(ip, &cols, &mut vtilde);
    let bridge_norm = ip.norm(&vtilde);
    if bridge_norm <= tol.breakdown * scale {
        return Err(KrylovError::LuckyBreakdown { step: m - 1 });
    }
    vscale(Complex64::new(1.0 / bridge_norm, 0.0), &mut vtilde);
    cols.push(vtilde);

    // v_m from A v_{m−1}; the coefficients against the shift-and-invert
    // block become the coupling column y, the diagonal one is a_{m−1}.
    let mut vhat = a.apply(&cols[m - 2]);
    let h = mgs(ip, &cols, &mut vhat);
    let y = &h[..m - 2];
    let a_last = h[m - 2].re;
    let beta_last = ip.norm(&vhat);
    if beta_last <= tol.breakdown * scale {
        return Err(KrylovError::LuckyBreakdown { step: m });
    }
    vscale(Complex64::new(1.0 / beta_last, 0.0), &mut vhat);
    cols.push(vhat);

    // Ã_{m−1} = [[Ã_{m−2}, y], [yᴴ, a_{m−1}]].
    let k = m - 1;
    let mut inter = CMatrix::zeros(k, k);
    for i in 0..m - 2 {
        for j in 0..m - 2 {
            inter[(i, j)] = sai.rep[(i, j)];
        }
    }
    for (i, yi) in y.iter().enumerate() {
        inter[(i, k - 1)] = *yi;
        inter[(k - 1, i)] = yi.conj();
    }
    inter[(k - 1, k - 1)] = Complex64::new(a_last, 0.0);

    let eig = hermitian_eig(&inter, tol)?;
    check_guard(xi, &eig.eigenvalues, tol)?;

    // ω_m = ξ + β²_{m−1} e_{m−1}ᴴ (Ã_{m−1} − ξI)⁻¹ e_{m−1}.
    let mut shifted_inter = inter.clone();
    for i in 0..k {
        shifted_inter[(i, i)] -= Complex64::new(xi, 0.0);
    }
    let lu = DenseLu::new(&shifted_inter)?;
    let mut rhs = vec![ZERO; k];
    rhs[k - 1] = Complex64::new(1.0, 0.0);
    let omega = xi + beta_last * beta_last * lu.solve(&rhs)[k - 1].re;

    // B_m = [[Ã_{m−1}, β_{m−1}e_{m−1}], [β_{m−1}e_{m−1}ᴴ, ω_m]].
    let mut rep = CMatrix::zeros(m, m);
    for i in 0..k {
        for j in 0..k {
            rep[(i, j)] = inter[(i, j)];
        }
    }
    rep[(k - 1, m - 1)] = Complex64::new(beta_last, 0.0);
    rep[(m - 1, k - 1)] = Complex64::new(beta_last, 0.0);
    rep[(m - 1, m - 1)] = Complex64::new(omega, 0.0);

    let basis = CMatrix::from_columns(&cols);
    let x: CVector = (0..m).map(|j| ip.inner(basis.column(j), u)).collect();

    // Quasi-orthogonal residual of the bordered relation.
    let mut r = a.apply(basis.column(m - 1));
    vaxpy(Complex64::new(-beta_last, 0.0), basis.column(m - 2), &mut r);
    vaxpy(Complex64::new(-omega, 0.0), basis.column(m - 1), &mut r);
    let rnorm = ip.norm(&r);
    let residual = if rnorm > tol.breakdown * scale {
        vscale(Complex64::new(1.0 / rnorm, 0.0), &mut r);
        Some((r, rnorm))
    } else {
        None
    };
    Ok(KrylovDecomposition {
        basis,
        rep,
        x,
        beta0,
        residual,
        kind: DecompositionKind::QorRational { s, xi },
    })
}

/// Two-pass modified Gram-Schmidt, returning accumulated coefficients.
fn mgs(ip: &InnerProduct, basis: &[CVector], w: &mut CVector) -> CVector {
    let mut h = vec![ZERO; basis.len()];
    for _ in 0..2 {
        for (j, q) in basis.iter().enumerate() {
            let c = ip.inner(q, w);
            vaxpy(-c, q, w);
            h[j] += c;
        }
    }
    h
}

fn lift_function(
    dec: &KrylovDecomposition,
    f: impl Fn(f64) -> Complex64,
    tol: &ToleranceProfile,
) -> Result<CVector, QorError> {
    let eig = hermitian_eig(&dec.rep, tol)?;
    let m = dec.m();
    let mut small = vec![ZERO; m];
    for j in 0..m {
        let theta = eig.eigenvalues[j];
        let fv = f(theta);
        if !fv.re.is_finite() || !fv.im.is_finite() {
            return Err(QorError::NonFiniteAtEigenvalue { theta });
        }
        let q = eig.eigenvectors.column(j);
        let coef = fv * vdot(q, &dec.x);
        vaxpy(coef, q, &mut small);
    }
    let mut out = vec![ZERO; dec.dim()];
    for (i, &coef) in small.iter().enumerate().take(m) {
        vaxpy(coef, dec.basis.column(i), &mut out);
    }
    Ok(out)
}

/// The polynomial-kind function approximant `β₀ V_m f(T_m) e₁ ≈ f(A)u`
/// (also valid for plain Lanczos decompositions, where it reads
/// `β₀ V_m f(J_m) e₁`). Exact for polynomials of degree `< m`.
///
/// # Errors
/// `WrongKind` for rational decompositions; `NonFiniteAtEigenvalue` when
/// `f` is undefined on the representation's spectrum.
pub fn qor_fun_approx(
    dec: &KrylovDecomposition,
    f: impl Fn(f64) -> Complex64,
    tol: &ToleranceProfile,
) -> Result<CVector, QorError> {
    match dec.kind {
        DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => {}
        kind => return Err(QorError::WrongKind { kind }),
    }
    lift_function(dec, f, tol)
}

/// The rational-kind function approximant `U_m f(B_m) x ≈ f(A)u` (also
/// valid for the shift-and-invert and extended Rayleigh quotients). Exact
/// for rational functions in the decomposition's exactness class.
///
/// # Errors
/// `WrongKind` for polynomial decompositions; `NonFiniteAtEigenvalue`
/// when `f` is undefined on the representation's spectrum.
pub fn rational_qor_fun_approx(
    dec: &KrylovDecomposition,
    f: impl Fn(f64) -> Complex64,
    tol: &ToleranceProfile,
) -> Result<CVector, QorError> {
    match dec.kind {
        DecompositionKind::QorRational { .. }
        | DecompositionKind::SaIReal { .. }
        | DecompositionKind::SaIComplex { .. }
        | DecompositionKind::Extended { .. } => {}
        kind => return Err(QorError::WrongKind { kind }),
    }
    lift_function(dec, f, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{laplacian_1d, random_unit_vector, vnorm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn diag_op(entries: &[f64]) -> HermitianOperator {
        HermitianOperator::diagonal(entries.to_vec())
    }

    fn ones(n: usize) -> CVector {
        vec![Complex64::new(1.0, 0.0); n]
    }

    #[test]
    fn preassigning_a_ritz_value_recovers_the_jacobi_matrix() {
        // When ξ is an eigenvalue of J_m, the bordered matrix T_m equals
        // J_m: the corner entry ω_m lands exactly on a_m.
        let entries: Vec<f64> = (1..=50).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let u = ones(50);
        let m = 5;
        let plain = lanczos(&a, &u, m, &tol()).unwrap();
        let theta = hermitian_eig(&plain.rep, &tol()).unwrap().eigenvalues;
        let xi = theta[2];
        let qor = qor_poly(&a, &u, m, xi, &tol()).unwrap();
        let diff = qor.rep.sub(&plain.rep).norm_fro();
        assert!(diff < 1e-10 * plain.rep.norm_fro(), "defect {diff}");
    }

    #[test]
    fn xi_on_predecessor_eigenvalue_is_guarded() {
        let entries: Vec<f64> = (1..=50).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let u = ones(50);
        let pre = lanczos(&a, &u, 4, &tol()).unwrap();
        let pole = hermitian_eig(&pre.rep, &tol()).unwrap().eigenvalues[1];
        match qor_poly(&a, &u, 5, pole, &tol()) {
            Err(KrylovError::GuardViolation { .. }) => {}
            other => panic!("expected guard violation, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn xi_below_spectrum_is_the_single_exterior_eigenvalue() {
        let entries: Vec<f64> = (1..=40).map(|k| k as f64 * 0.5 + 2.0).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(40, 7, ip);
        let xi = 1.0; // below λ₁ = 2.5
        let dec = qor_poly(&a, &u, 6, xi, &tol()).unwrap();
        let theta = hermitian_eig(&dec.rep, &tol()).unwrap().eigenvalues;
        let below: Vec<f64> = theta.iter().copied().filter(|t| *t < 2.5).collect();
        assert_eq!(below.len(), 1);
        assert!((below[0] - xi).abs() < 1e-10 * dec.rep.norm_fro());
        // The rest stay inside the spectrum.
        assert!(theta[1] > 2.5 && *theta.last().unwrap() < 22.0);
    }

    #[test]
    fn qor_decomposition_relation_holds() {
        let entries: Vec<f64> = (0..30).map(|k| (k as f64).powf(1.2)).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(30, 3, ip);
        let m = 7;
        let dec = qor_poly(&a, &u, m, -1.0, &tol()).unwrap();
        assert!(dec.orthonormality_defect(ip) < 1e-12);
        let (r, rnorm) = dec.residual.clone().unwrap();
        // A V_m = V_m T_m + r e_mᴴ columnwise.
        for j in 0..m {
            let av = a.apply(dec.basis.column(j));
            let mut rhs = vec![ZERO; 30];
            for i in 0..m {
                vaxpy(dec.rep[(i, j)], dec.basis.column(i), &mut rhs);
            }
            if j == m - 1 {
                vaxpy(c(rnorm, 0.0), &r, &mut rhs);
            }
            let diff: CVector = av.iter().zip(&rhs).map(|(x, y)| x - y).collect();
            assert!(vnorm(&diff) < 1e-10 * a.norm_est());
        }
        // The residual is orthogonal to the leading m−1 basis vectors but
        // not to v_m (quasi-orthogonality).
        for j in 0..m - 1 {
            assert!(ip.inner(dec.basis.column(j), &r).norm() < 1e-10);
        }
    }

    #[test]
    fn rational_qor_matches_polynomial_qor_on_explicit_start() {
        // For a real pole outside the spectrum, the rational construction
        // from u must agree (in eigenvalues) with the polynomial one from
        // u_q = (A−sI)^{−(m−1)}u.
        let entries: Vec<f64> = (1..=30).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(30, 11, ip);
        let m = 5;
        let s = 50.0;
        let xi = 0.5;
        let rational = qor_rational_sai(&a, &u, m, c(s, 0.0), xi, &tol()).unwrap();
        let mut uq = u.clone();
        for _ in 0..m - 1 {
            uq = crate::linalg::shifted_solve(&a, c(s, 0.0), &uq, &tol()).unwrap();
        }
        let poly = qor_poly(&a, &uq, m, xi, &tol()).unwrap();
        let own = hermitian_eig(&rational.rep, &tol()).unwrap().eigenvalues;
        let reference = hermitian_eig(&poly.rep, &tol()).unwrap().eigenvalues;
        for (x, y) in own.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-8 * y.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn rational_qor_preassigns_xi_and_represents_u() {
        let entries: Vec<f64> = (1..=24).map(|k| k as f64 + 0.25).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(24, 19, ip);
        let m = 6;
        let xi = -3.0;
        let dec = qor_rational_sai(&a, &u, m, c(60.0, 0.0), xi, &tol()).unwrap();
        assert!(dec.orthonormality_defect(ip) < 1e-11);
        assert!(matches!(dec.kind, DecompositionKind::QorRational { .. }));
        // ξ is an eigenvalue of B_m.
        let theta = hermitian_eig(&dec.rep, &tol()).unwrap().eigenvalues;
        let nearest = theta.iter().map(|t| (t - xi).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-10 * dec.rep.norm_fro());
        // x = (U_m,u)_M with ‖x‖₂ = β₀, and u is reproduced by U_m x
        // because u lies in the subspace.
        assert!((vnorm(&dec.x) - dec.beta0).abs() < 1e-10);
        let back = rational_qor_fun_approx(&dec, |_| c(1.0, 0.0), &tol()).unwrap();
        let diff: CVector = back.iter().zip(&u).map(|(x, y)| x - y).collect();
        assert!(vnorm(&diff) < 1e-10);
    }

    #[test]
    fn rational_qor_guard_rejects_intermediate_eigenvalue() {
        let entries: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let u = ones(20);
        let m = 5;
        let s = c(40.0, 0.0);
        // Recover the intermediate matrix's eigenvalues by running the
        // construction once with a harmless ξ and peeling off the last
        // row/column of B_m.
        let probe = qor_rational_sai(&a, &u, m, s, -7.0, &tol()).unwrap();
        let k = m - 1;
        let inter = CMatrix::from_fn(k, k, |i, j| probe.rep[(i, j)]);
        let bad_xi = hermitian_eig(&inter, &tol()).unwrap().eigenvalues[1];
        match qor_rational_sai(&a, &u, m, s, bad_xi, &tol()) {
            Err(KrylovError::GuardViolation { .. }) => {}
            other => panic!("expected guard violation, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn qor_approximant_is_exact_for_low_degree() {
        // f(λ) = λ on a qor decomposition reproduces Au.
        let entries: Vec<f64> = (1..=25).map(|k| (k as f64).sqrt()).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(25, 23, ip);
        let dec = qor_poly(&a, &u, 4, 11.0, &tol()).unwrap();
        let approx = qor_fun_approx(&dec, |lam| c(lam, 0.0), &tol()).unwrap();
        let direct = a.apply(&u);
        let diff: CVector = approx.iter().zip(&direct).map(|(x, y)| x - y).collect();
        assert!(vnorm(&diff) < 1e-10 * vnorm(&direct));
    }

    #[test]
    fn qor_approximant_conserves_mass_for_unitary_functions() {
        // f(λ) = exp(−i·0.1·λ): ‖f(A)u‖ = ‖u‖, and the approximant keeps
        // that norm because T_m is Hermitian.
        let a = laplacian_1d(200).unwrap();
        let ip = a.inner_product();
        let u = random_unit_vector(200, 5, ip);
        let dec = qor_poly(&a, &u, 10, -50.0, &tol()).unwrap();
        let approx = qor_fun_approx(
            &dec,
            |lam| Complex64::new(0.0, -0.1 * lam).exp(),
            &tol(),
        )
        .unwrap();
        assert!((vnorm(&approx) - vnorm(&u)).abs() < 1e-10);
    }

    #[test]
    fn qor_approximant_error_is_orthogonal_to_predecessor_space() {
        // For f(λ) = λ^m the approximation error lies in
        // span{v_m, v_{m+1}}, hence is orthogonal to the first m−1 basis
        // vectors.
        let entries: Vec<f64> = (1..=20).map(|k| k as f64 / 4.0).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(20, 29, ip);
        let m = 5;
        let dec = qor_poly(&a, &u, m, 0.1, &tol()).unwrap();
        let approx = qor_fun_approx(&dec, |lam| c(lam.powi(m as i32), 0.0), &tol()).unwrap();
        let mut direct = u.clone();
        for _ in 0..m {
            direct = a.apply(&direct);
        }
        let err: CVector = approx.iter().zip(&direct).map(|(x, y)| x - y).collect();
        let scale = vnorm(&err);
        for j in 0..m - 1 {
            let proj = ip.inner(dec.basis.column(j), &err).norm();
            assert!(proj < 1e-8 * scale, "column {j}: {proj} vs {scale}");
        }
    }

    #[test]
    fn rational_approximant_is_exact_in_its_class() {
        // r = p/q_{m−1} with p ∈ Π_{m−1} is reproduced exactly by the
        // rational qor approximant.
        let entries: Vec<f64> = (1..=22).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(22, 37, ip);
        let m = 5;
        let s = 45.0;
        let dec = qor_rational_sai(&a, &u, m, c(s, 0.0), 0.0, &tol()).unwrap();
        let p = |lam: f64| 0.3 * lam.powi(4) - 2.0 * lam + 5.0;
        let r = move |lam: f64| c(p(lam) / (lam - s).powi((m - 1) as i32), 0.0);
        let approx = rational_qor_fun_approx(&dec, r, &tol()).unwrap();
        let direct: CVector = entries.iter().zip(&u).map(|(&d, ui)| r(d) * ui).collect();
        let diff: CVector = approx.iter().zip(&direct).map(|(x, y)| x - y).collect();
        assert!(vnorm(&diff) < 1e-8 * vnorm(&direct));
    }

    #[test]
    fn rational_approximant_conserves_mass() {
        let entries: Vec<f64> = (1..=30).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let ip = a.inner_product();
        let u = random_unit_vector(30, 41, ip);
        let dec = qor_rational_sai(&a, &u, 6, c(55.0, 0.0), 0.2, &tol()).unwrap();
        let approx = rational_qor_fun_approx(
            &dec,
            |lam| Complex64::new(0.0, -0.3 * lam).exp(),
            &tol(),
        )
        .unwrap();
        // u lies in the subspace, so the unitary image keeps its norm.
        assert!((vnorm(&approx) - vnorm(&u)).abs() < 1e-10);
    }

    #[test]
    fn approximants_reject_mismatched_kinds() {
        let entries: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let u = ones(10);
        let poly = lanczos(&a, &u, 3, &tol()).unwrap();
        let rational = sai_real(&a, &u, 3, -4.0, &tol()).unwrap();
        assert!(matches!(
            rational_qor_fun_approx(&poly, |lam| c(lam, 0.0), &tol()),
            Err(QorError::WrongKind { .. })
        ));
        assert!(matches!(
            qor_fun_approx(&rational, |lam| c(lam, 0.0), &tol()),
            Err(QorError::WrongKind { .. })
        ));
    }

    #[test]
    fn approximant_rejects_singular_function_values() {
        let entries: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let a = diag_op(&entries);
        let u = ones(10);
        let dec = lanczos(&a, &u, 3, &tol()).unwrap();
        let theta = hermitian_eig(&dec.rep, &tol()).unwrap().eigenvalues[0];
        let res = qor_fun_approx(&dec, move |lam| c(1.0 / (lam - theta), 0.0), &tol());
        assert!(matches!(res, Err(QorError::NonFiniteAtEigenvalue { .. })));
    }
}
