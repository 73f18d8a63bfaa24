//! Krylov decompositions of a Hermitian operator: orthonormal bases paired
//! with small Hermitian representation matrices.
//!
//! Five builders are provided:
//!
//! * [`lanczos`] — the polynomial subspace `span{u, Au, …, A^{m−1}u}` with
//!   its Jacobi matrix;
//! * [`sai_real`] — the shift-and-invert subspace for a real shift,
//!   i.e. the polynomial subspace of `X = (A−sI)⁻¹`, with the Rayleigh
//!   quotient of `A` recovered from the small matrix of `X`;
//! * [`isometric_arnoldi`] — the coupled two-term recurrence for a unitary
//!   operator, used on Cayley transforms;
//! * [`sai_complex`] — shift-and-invert for a complex shift, built on the
//!   isometric recurrence so only one factorization of `A − sI` is needed;
//! * [`extended_lanczos`] — the subspace spanned by both negative and
//!   positive powers, `{(A−sI)^{−ρ+1}u, …, u, …, A^{ρ−1}u}`.
//!
//! All builders orthogonalize with two-pass modified Gram-Schmidt against
//! the full basis: the downstream separation bounds need orthogonality far
//! below the usual drift of short recurrences.

use num_complex::Complex64;

use crate::linalg::{
    shift_below_spectrum, vaxpy, vscale, CMatrix, CVector, HermitianOperator, InnerProduct,
    LinalgError, ShiftedOperator, ToleranceProfile, TridiagFactor,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Errors from the decomposition builders.
#[derive(Debug, thiserror::Error)]
pub enum KrylovError {
    #[error("starting vector has zero norm under the metric")]
    ZeroStartVector,
    #[error("lucky breakdown at step {step}: the subspace is invariant")]
    LuckyBreakdown { step: usize },
    #[error("requested dimension {m} exceeds the operator dimension {n}")]
    TooManySteps { m: usize, n: usize },
    #[error("subspace dimension {got} is below the minimum {min} for this construction")]
    TooSmall { min: usize, got: usize },
    #[error("shift {s} is real; use the real-shift builder")]
    RealShift { s: f64 },
    #[error("shift {s} is not strictly below the spectrum")]
    ShiftNotBelowSpectrum { s: f64 },
    #[error("unitarity loss: |γ| = {gamma} exceeds 1 beyond tolerance")]
    UnitarityLoss { gamma: f64 },
    #[error("representation defect {defect:.3e} exceeds the Hermitian tolerance {tol:.3e}")]
    RepresentationNotHermitian { defect: f64, tol: f64 },
    #[error("preassigned value {xi} is within {distance:.3e} of a representation eigenvalue (guard {threshold:.3e})")]
    GuardViolation { xi: f64, distance: f64, threshold: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which subspace a decomposition represents, with its shift data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecompositionKind {
    /// Polynomial subspace; representation is the Jacobi matrix.
    Polynomial,
    /// Shift-and-invert with a real shift `s` of multiplicity `m−1`.
    SaIReal { s: f64 },
    /// Shift-and-invert with a complex shift `s` of multiplicity `m−1`.
    SaIComplex { s: Complex64 },
    /// Extended subspace with `ρ−1` negative powers of `A − sI`.
    Extended { rho: usize, s: f64 },
    /// Quasi-orthogonal-residual polynomial representation with
    /// preassigned eigenvalue `ξ`.
    QorPoly { xi: f64 },
    /// Quasi-orthogonal-residual shift-and-invert representation with
    /// pole `s` and preassigned eigenvalue `ξ`.
    QorRational { s: Complex64, xi: f64 },
}

/// The pole structure of the rational function class a decomposition is
/// exact for; `multiplicity` counts the denominator degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoleSpec {
    /// No pole: plain polynomial exactness.
    None,
    /// A single real pole `s` with the given multiplicity.
    SingleReal { s: f64, multiplicity: usize },
    /// A single complex pole `s` (nonreal) with the given multiplicity.
    SingleComplex { s: Complex64, multiplicity: usize },
    /// A real pole `s < λ₁` from an extended subspace with `ρ−1` negative
    /// powers.
    ExtendedShift { s: f64, rho: usize },
}

impl DecompositionKind {
    /// The pole structure for a decomposition of dimension `m`.
    pub fn pole_spec(&self, m: usize) -> PoleSpec {
        match *self {
            DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => PoleSpec::None,
            DecompositionKind::SaIReal { s } => PoleSpec::SingleReal { s, multiplicity: m - 1 },
            DecompositionKind::SaIComplex { s } => {
                PoleSpec::SingleComplex { s, multiplicity: m - 1 }
            }
            DecompositionKind::QorRational { s, .. } => {
                if s.im == 0.0 {
                    PoleSpec::SingleReal { s: s.re, multiplicity: m - 1 }
                } else {
                    PoleSpec::SingleComplex { s, multiplicity: m - 1 }
                }
            }
            DecompositionKind::Extended { rho, s } => PoleSpec::ExtendedShift { s, rho },
        }
    }
}

/// An orthonormal basis `U_m` of a Krylov subspace together with the small
/// Hermitian representation of `A` (or of `X = (A−sI)⁻¹`) on it.
#[derive(Clone, Debug)]
pub struct KrylovDecomposition {
    /// `n×m` basis, orthonormal under the operator's inner product.
    pub basis: CMatrix,
    /// `m×m` Hermitian representation matrix.
    pub rep: CMatrix,
    /// Representation of the starting vector, `x = (U_m,u)_M`.
    pub x: CVector,
    /// `‖u‖_M`.
    pub beta0: f64,
    /// The next basis vector and its recurrence coefficient, when the
    /// subspace is not invariant.
    pub residual: Option<(CVector, f64)>,
    /// Subspace kind and shift data.
    pub kind: DecompositionKind,
}

impl KrylovDecomposition {
    /// Subspace dimension `m`.
    pub fn m(&self) -> usize {
        self.rep.nrows()
    }

    /// Operator dimension `n`.
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `‖(U_m,U_m)_M − I‖_F`, a diagnostic for the basis quality.
    pub fn orthonormality_defect(&self, ip: &InnerProduct) -> f64 {
        let m = self.m();
        let mut defect = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let g = ip.inner(self.basis.column(i), self.basis.column(j));
                let expected = if i == j { ONE } else { ZERO };
                defect += (g - expected).norm_sqr();
            }
        }
        defect.sqrt()
    }
}

/// Two-pass modified Gram-Schmidt of `w` against `basis`; returns the
/// accumulated coefficients `(basis_j, w)_M`.
fn mgs_orthogonalize(ip: &InnerProduct, basis: &[CVector], w: &mut CVector) -> CVector {
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

fn normalize_start(
    ip: &InnerProduct,
    u: &[Complex64],
) -> Result<(f64, CVector), KrylovError> {
    let beta0 = ip.norm(u);
    if beta0.is_nan() || beta0 <= f64::MIN_POSITIVE.sqrt() {
        return Err(KrylovError::ZeroStartVector);
    }
    let mut v = u.to_vec();
    vscale(Complex64::new(1.0 / beta0, 0.0), &mut v);
    Ok((beta0, v))
}

struct Chain {
    /// Diagonal recurrence coefficients, one per step.
    alphas: Vec<f64>,
    /// Off-diagonal coefficients between consecutive chain vectors
    /// (`steps − 1` entries).
    betas: Vec<f64>,
    /// Coefficients of the first application against the basis columns
    /// that existed before the chain's own starting vector.
    coupling: CVector,
    /// Next vector and coefficient when the final step did not break down.
    residual: Option<(CVector, f64)>,
}

/// Runs `steps` Hermitian Lanczos steps with full reorthogonalization,
/// starting from the last column of `basis` and appending new columns.
///
/// `scale` seeds the relative breakdown floor and is updated with observed
/// vector norms, so solve-based operators need no a-priori norm estimate.
/// `step_offset` shifts the step index reported by `LuckyBreakdown`.
fn hermitian_chain(
    mut apply: impl FnMut(&[Complex64]) -> Result<CVector, KrylovError>,
    ip: &InnerProduct,
    basis: &mut Vec<CVector>,
    steps: usize,
    mut scale: f64,
    step_offset: usize,
    tol: &ToleranceProfile,
) -> Result<Chain, KrylovError> {
    assert!(!basis.is_empty(), "chain needs a starting vector");
    let preexisting = basis.len() - 1;
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps.saturating_sub(1));
    let mut coupling = vec![ZERO; preexisting];
    let mut residual = None;
    for k in 0..steps {
        let mut w = apply(basis.last().expect("non-empty basis"))?;
        scale = scale.max(ip.norm(&w));
        let h = mgs_orthogonalize(ip, basis, &mut w);
        if k == 0 {
            coupling.copy_from_slice(&h[..preexisting]);
        }
        alphas.push(h[basis.len() - 1].re);
        let beta = ip.norm(&w);
        let floor = tol.breakdown * scale.max(f64::MIN_POSITIVE);
        if k + 1 < steps {
            if beta <= floor {
                return Err(KrylovError::LuckyBreakdown { step: step_offset + k + 1 });
            }
            vscale(Complex64::new(1.0 / beta, 0.0), &mut w);
            basis.push(w);
            betas.push(beta);
        } else if beta > floor {
            vscale(Complex64::new(1.0 / beta, 0.0), &mut w);
            residual = Some((w, beta));
        }
    }
    Ok(Chain { alphas, betas, coupling, residual })
}

fn tridiagonal_rep(alphas: &[f64], betas: &[f64]) -> CMatrix {
    let m = alphas.len();
    CMatrix::from_fn(m, m, |i, j| {
        if i == j {
            Complex64::new(alphas[i], 0.0)
        } else if i == j + 1 {
            Complex64::new(betas[j], 0.0)
        } else if j == i + 1 {
            Complex64::new(betas[i], 0.0)
        } else {
            ZERO
        }
    })
}

fn unit_vector(m: usize, index: usize) -> CVector {
    let mut e = vec![ZERO; m];
    e[index] = ONE;
    e
}

/// The polynomial Krylov decomposition: `m` Lanczos steps with full
/// reorthogonalization, producing the Jacobi matrix `J_m` with positive
/// off-diagonal entries, `x = β₀e₁`, and the residual pair
/// `(v_{m+1}, β_m)` of the three-term recurrence.
///
/// # Errors
/// `ZeroStartVector`; `TooManySteps`; `LuckyBreakdown{step}` when the
/// recurrence coefficient `β_j` falls below the breakdown floor for some
/// `j < m` (the subspace is invariant).
pub fn lanczos(
    a: &HermitianOperator,
    u: &[Complex64],
    m: usize,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    let ip = a.inner_product();
    let n = a.dim();
    if m < 1 {
        return Err(KrylovError::TooSmall { min: 1, got: m });
    }
    if m > n {
        return Err(KrylovError::TooManySteps { m, n });
    }
    let (beta0, v1) = normalize_start(ip, u)?;
    let mut basis = vec![v1];
    let chain = hermitian_chain(
        |v| Ok(a.apply(v)),
        ip,
        &mut basis,
        m,
        a.norm_est(),
        0,
        tol,
    )?;
    let rep = tridiagonal_rep(&chain.alphas, &chain.betas);
    let mut x = unit_vector(m, 0);
    vscale(Complex64::new(beta0, 0.0), &mut x);
    Ok(KrylovDecomposition {
        basis: CMatrix::from_columns(&basis),
        rep,
        x,
        beta0,
        residual: chain.residual,
        kind: DecompositionKind::Polynomial,
    })
}

/// Shared tail of the real-shift builders: from the Lanczos data of
/// `X = (A−sI)⁻¹` (tridiagonal `X_m`, residual pair), assemble the
/// Rayleigh quotient of `A`,
///
/// ```text
/// A_m = (X_m⁻¹ + (X_m⁻¹)ᴴ)/2 + sI + β_m²(κ − s)·y_m y_mᴴ,
/// ```
///
/// with `y_mᴴ = e_mᴴ X_m⁻¹` and `κ = (u_{m+1}, A u_{m+1})_M`.
fn sai_rep_from_x_chain(
    a: &HermitianOperator,
    s: f64,
    alphas: &[f64],
    betas: &[f64],
    residual: &Option<(CVector, f64)>,
) -> Result<CMatrix, KrylovError> {
    let m = alphas.len();
    let d: CVector = alphas.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let e: CVector = betas.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let factor = TridiagFactor::new(&e, &d, &e)?;
    let mut inv = CMatrix::zeros(m, m);
    for j in 0..m {
        let col = factor.solve(&unit_vector(m, j));
        inv.column_mut(j).copy_from_slice(&col);
    }
    let mut rep = inv.clone();
    rep.hermitize();
    for i in 0..m {
        rep[(i, i)] += Complex64::new(s, 0.0);
    }
    if let Some((u_next, beta_m)) = residual {
        let ip = a.inner_product();
        let kappa = ip.inner(u_next, &a.apply(u_next)).re;
        let y = factor.solve(&unit_vector(m, m - 1));
        let w = beta_m * beta_m * (kappa - s);
        for i in 0..m {
            for j in 0..m {
                rep[(i, j)] += w * y[i] * y[j].conj();
            }
        }
    }
    Ok(rep)
}

/// The shift-and-invert decomposition for a real shift `s` outside the
/// spectrum: `m` Lanczos steps on `X = (A−sI)⁻¹` (one factorization,
/// `m` solves), then the Rayleigh quotient of `A` is reassembled from
/// `X_m`, the residual pair and one extra operator application.
/// `x = β₀e₁`; the residual pair is the one of the `X`-recurrence.
///
/// # Errors
/// `Singular` (via `Linalg`) when `s` is numerically an eigenvalue;
/// `LuckyBreakdown` from the Lanczos chain; `X_m` singular (via `Linalg`).
pub fn sai_real(
    a: &HermitianOperator,
    u: &[Complex64],
    m: usize,
    s: f64,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    let ip = a.inner_product();
    let n = a.dim();
    if m < 1 {
        return Err(KrylovError::TooSmall { min: 1, got: m });
    }
    if m > n {
        return Err(KrylovError::TooManySteps { m, n });
    }
    let shifted = ShiftedOperator::new(a, Complex64::new(s, 0.0), tol)?;
    let (beta0, v1) = normalize_start(ip, u)?;
    let mut basis = vec![v1];
    let chain = hermitian_chain(
        |v| shifted.solve(v).map_err(KrylovError::from),
        ip,
        &mut basis,
        m,
        0.0,
        0,
        tol,
    )?;
    let rep = sai_rep_from_x_chain(a, s, &chain.alphas, &chain.betas, &chain.residual)?;
    let mut x = unit_vector(m, 0);
    vscale(Complex64::new(beta0, 0.0), &mut x);
    Ok(KrylovDecomposition {
        basis: CMatrix::from_columns(&basis),
        rep,
        x,
        beta0,
        residual: chain.residual,
        kind: DecompositionKind::SaIReal { s },
    })
}

/// Result of the isometric Arnoldi recurrence for a unitary operator `Z`.
pub struct IsometricArnoldi {
    /// `n×m` orthonormal basis of the subspace built from `Z`.
    pub basis: CMatrix,
    /// `m×m` representation `Z_m = (U_m, Z U_m)_M`.
    pub zm: CMatrix,
    /// The recurrence coefficient `z_{m+1,m}`.
    pub z_last: f64,
    /// The next basis vector, when the subspace is not invariant.
    pub next: Option<CVector>,
    /// `‖u‖_M`.
    pub beta0: f64,
}

/// The isometric Arnoldi recurrence for a unitary operator action `z`:
/// builds an orthonormal basis of `span{u, Zu, …, Z^{m−1}u}` and the
/// representation `Z_m` from a coupled two-term recurrence, using one
/// application of `Z` per step.
///
/// The auxiliary vector is renormalized on every step even though exact
/// arithmetic would not require it, and new basis vectors are
/// reorthogonalized against the full basis.
///
/// # Errors
/// `UnitarityLoss` when `|γ| > 1` beyond tolerance (the action was not
/// unitary under `ip`); `LuckyBreakdown{step}` when `σ ≈ 0` before the
/// final step.
pub fn isometric_arnoldi(
    mut z: impl FnMut(&[Complex64]) -> Result<CVector, KrylovError>,
    u: &[Complex64],
    m: usize,
    ip: &InnerProduct,
    tol: &ToleranceProfile,
) -> Result<IsometricArnoldi, KrylovError> {
    if m < 1 {
        return Err(KrylovError::TooSmall { min: 1, got: m });
    }
    if m > ip.dim() {
        return Err(KrylovError::TooManySteps { m, n: ip.dim() });
    }
    let (beta0, v1) = normalize_start(ip, u)?;
    let mut vhat = v1.clone();
    let mut basis = vec![v1];
    let mut zm = CMatrix::identity(m);
    let mut z_last = 0.0;
    let mut next = None;
    for k in 1..=m {
        let w = z(&basis[k - 1])?;
        let gamma = -ip.inner(&vhat, &w);
        if gamma.norm() > 1.0 + tol.hermitize {
            return Err(KrylovError::UnitarityLoss { gamma: gamma.norm() });
        }
        let mut v = w;
        vaxpy(gamma, &vhat, &mut v);
        // Exact arithmetic leaves v orthogonal to the basis; enforce it.
        mgs_orthogonalize(ip, &basis, &mut v);
        let sigma = ip.norm(&v);
        if k < m {
            if sigma <= tol.breakdown {
                return Err(KrylovError::LuckyBreakdown { step: k });
            }
            vscale(Complex64::new(1.0 / sigma, 0.0), &mut v);
            // Right-multiply columns (k−1, k) of Z_m by the 2×2 block
            // [[−γ, σ], [σ, γ̄]].
            for i in 0..m {
                let a_col = zm[(i, k - 1)];
                let b_col = zm[(i, k)];
                zm[(i, k - 1)] = -gamma * a_col + sigma * b_col;
                zm[(i, k)] = sigma * a_col + gamma.conj() * b_col;
            }
            // v̂ ← (σ v̂ + γ̄ v_{k+1}), renormalized.
            vscale(Complex64::new(sigma, 0.0), &mut vhat);
            vaxpy(gamma.conj(), &v, &mut vhat);
            let norm = ip.norm(&vhat);
            vscale(Complex64::new(1.0 / norm, 0.0), &mut vhat);
            basis.push(v);
        } else {
            for i in 0..m {
                let a_col = zm[(i, k - 1)];
                zm[(i, k - 1)] = -gamma * a_col;
            }
            z_last = sigma;
            if sigma > tol.breakdown {
                vscale(Complex64::new(1.0 / sigma, 0.0), &mut v);
                next = Some(v);
            }
        }
    }
    Ok(IsometricArnoldi { basis: CMatrix::from_columns(&basis), zm, z_last, next, beta0 })
}

/// The shift-and-invert decomposition for a complex shift `s` (nonreal):
/// isometric Arnoldi on the Cayley transform `Z = (A−s̄I)(A−sI)⁻¹`
/// (applied as `Zv = v + (s−s̄)(A−sI)⁻¹v`, one factorization total),
/// then
///
/// ```text
/// A_m = (s̄I − sZ_m)(I−Z_m)⁻¹ + z_{m+1,m}²(κ − s̄)·y_m y_mᴴ,
/// ```
///
/// with `y_mᴴ = e_mᴴ(I−Z_m)⁻¹` and `κ = (u_{m+1}, A u_{m+1})_M`. The
/// result is Hermitian in exact arithmetic; the builder verifies the
/// defect and then symmetrizes.
///
/// # Errors
/// `RealShift` when `Im s = 0`; `Singular` (via `Linalg`) when `I − Z_m`
/// cannot be inverted; `RepresentationNotHermitian` when the assembled
/// matrix fails the defect check.
pub fn sai_complex(
    a: &HermitianOperator,
    u: &[Complex64],
    m: usize,
    s: Complex64,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    if s.im == 0.0 {
        return Err(KrylovError::RealShift { s: s.re });
    }
    let ip = a.inner_product();
    let shifted = ShiftedOperator::new(a, s, tol)?;
    let two_i_im = s - s.conj();
    let iso = isometric_arnoldi(
        |v| {
            let xv = shifted.solve(v)?;
            let mut w = v.to_vec();
            vaxpy(two_i_im, &xv, &mut w);
            Ok(w)
        },
        u,
        m,
        ip,
        tol,
    )?;
    // G = (I − Z_m)⁻¹, columnwise.
    let mut i_minus_z = iso.zm.clone();
    for i in 0..m {
        for j in 0..m {
            i_minus_z[(i, j)] = if i == j { ONE - iso.zm[(i, j)] } else { -iso.zm[(i, j)] };
        }
    }
    let lu = crate::linalg::DenseLu::new(&i_minus_z)?;
    let mut g = CMatrix::zeros(m, m);
    for j in 0..m {
        let col = lu.solve(&unit_vector(m, j));
        g.column_mut(j).copy_from_slice(&col);
    }
    // R = (s̄I − sZ_m)·G, then the rank-one correction.
    let mut lhs = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            lhs[(i, j)] = -s * iso.zm[(i, j)] + if i == j { s.conj() } else { ZERO };
        }
    }
    let mut r = lhs.matmul(&g);
    if let Some(u_next) = &iso.next {
        let kappa = ip.inner(u_next, &a.apply(u_next)).re;
        let weight = iso.z_last * iso.z_last * (Complex64::new(kappa, 0.0) - s.conj());
        // y_mᴴ = e_mᴴG is the last row of G; y_m is its conjugate.
        let y: CVector = (0..m).map(|j| g[(m - 1, j)].conj()).collect();
        for i in 0..m {
            for j in 0..m {
                r[(i, j)] += weight * y[i] * y[j].conj();
            }
        }
    }
    let defect = r.hermitian_defect();
    let bound = tol.hermitize * r.norm_fro().max(f64::MIN_POSITIVE);
    if defect > bound {
        return Err(KrylovError::RepresentationNotHermitian { defect, tol: bound });
    }
    r.hermitize();
    let mut x = unit_vector(m, 0);
    vscale(Complex64::new(iso.beta0, 0.0), &mut x);
    let residual = iso.next.map(|v| (v, iso.z_last));
    Ok(KrylovDecomposition {
        basis: iso.basis,
        rep: r,
        x,
        beta0: iso.beta0,
        residual,
        kind: DecompositionKind::SaIComplex { s },
    })
}

/// The extended decomposition spanning negative and positive powers,
/// `span{(A−sI)^{−ρ+1}u, …, u, Au, …, A^{ρ−1}u}` with `m = 2ρ−1` and a
/// real shift `s` strictly below the spectrum. Built from a size-`ρ`
/// shift-and-invert decomposition, a bridging vector `Au`, and a `ρ−1`
/// step Lanczos chain; the representation is the Hermitian block matrix
///
/// ```text
/// A_m = [ A_ρ    y e₁ᴴ    ]
///       [ e₁ yᴴ  J_{ρ−1} ],
/// ```
///
/// where `y` holds the coupling coefficients of `A u_{ρ+1}` against the
/// shift-and-invert block. `x = β₀e₁`.
///
/// # Errors
/// `ShiftNotBelowSpectrum` unless `A − sI` is positive definite;
/// breakdown and solve errors as in the underlying builders.
pub fn extended_lanczos(
    a: &HermitianOperator,
    u: &[Complex64],
    rho: usize,
    s: f64,
    tol: &ToleranceProfile,
) -> Result<KrylovDecomposition, KrylovError> {
    let ip = a.inner_product();
    let n = a.dim();
    if rho < 1 {
        return Err(KrylovError::TooSmall { min: 1, got: rho });
    }
    let m = 2 * rho - 1;
    if m > n {
        return Err(KrylovError::TooManySteps { m, n });
    }
    if !shift_below_spectrum(a, s) {
        return Err(KrylovError::ShiftNotBelowSpectrum { s });
    }
    let sai = sai_real(a, u, rho, s, tol)?;
    if rho == 1 {
        return Ok(KrylovDecomposition { kind: DecompositionKind::Extended { rho, s }, ..sai });
    }
    let mut basis: Vec<CVector> = (0..rho).map(|j| sai.basis.column_vec(j)).collect();
    // Bridge to positive powers: orthogonalize Au against the
    // shift-and-invert block.
    let mut vtilde = a.apply(&basis[0]);
    let scale = a.norm_est();
    mgs_orthogonalize(ip, &basis, &mut vtilde);
    let bridge_norm = ip.norm(&vtilde);
    if bridge_norm <= tol.breakdown * scale.max(f64::MIN_POSITIVE) {
        return Err(KrylovError::LuckyBreakdown { step: rho + 1 });
    }
    vscale(Complex64::new(1.0 / bridge_norm, 0.0), &mut vtilde);
    basis.push(vtilde);
    let chain = hermitian_chain(
        |v| Ok(a.apply(v)),
        ip,
        &mut basis,
        rho - 1,
        scale,
        rho,
        tol,
    )?;
    let mut rep = CMatrix::zeros(m, m);
    for i in 0..rho {
        for j in 0..rho {
            rep[(i, j)] = sai.rep[(i, j)];
        }
    }
    for (i, y) in chain.coupling.iter().enumerate() {
        rep[(i, rho)] = *y;
        rep[(rho, i)] = y.conj();
    }
    for k in 0..rho - 1 {
        rep[(rho + k, rho + k)] = Complex64::new(chain.alphas[k], 0.0);
    }
    for k in 0..chain.betas.len() {
        rep[(rho + k, rho + k + 1)] = Complex64::new(chain.betas[k], 0.0);
        rep[(rho + k + 1, rho + k)] = Complex64::new(chain.betas[k], 0.0);
    }
    let mut x = unit_vector(m, 0);
    vscale(Complex64::new(sai.beta0, 0.0), &mut x);
    Ok(KrylovDecomposition {
        basis: CMatrix::from_columns(&basis),
        rep,
        x,
        beta0: sai.beta0,
        residual: chain.residual,
        kind: DecompositionKind::Extended { rho, s },
    })
}
