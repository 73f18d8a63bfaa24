//! Krylov decompositions of Hermitian operators, Gaussian quadrature rules,
//! and Chebyshev-Markov-Stieltjes separation bounds on spectral
//! distributions.
//!
//! Given a Hermitian operator `A` (self-adjoint under a configurable
//! `M`-inner product) and a starting vector `u`, this crate constructs
//! polynomial, shift-and-invert (real or complex shift), extended, and
//! quasi-orthogonal-residual Krylov decompositions; extracts the Gaussian
//! and Gauss-Radau quadrature rules hiding inside their small
//! representation matrices; and turns those rules into certified two-sided
//! bounds that separate the spectral distribution function of `u`.
//!
//! The layers build on each other:
//!
//! * [`linalg`] — dense complex linear algebra under the `M`-inner product:
//!   eigensolvers, shifted solves, matrix generation and ingestion.
//! * [`krylov`] — the decomposition builders (Lanczos, shift-and-invert
//!   with real or complex shift, isometric Arnoldi, extended Lanczos).
//! * [`qor`] — quasi-orthogonal-residual variants that preassign an
//!   eigenvalue of the representation, and the matrix-function
//!   approximants built on all decomposition kinds.
//! * [`quadrature`] — the exact spectral distribution of the starting
//!   vector, Christoffel-weight rules read off the representations, and
//!   moment-based exactness checks.
//! * [`cms`] — the separation bounds themselves: measure queries against
//!   step distributions, per-index bound reports for every rule family,
//!   piecewise mass estimates, and the interpolated majorants that
//!   certify them.

pub mod cms;
pub mod krylov;
pub mod linalg;
pub mod qor;
pub mod quadrature;

pub use cms::{
    alpha_m_from_rule, cms_complex_upper, cms_extended, cms_piecewise_polynomial,
    cms_piecewise_rational, cms_polynomial, cms_rational_real, f_diagnostic, majorant_polynomial,
    measure, rational_majorant, sampling_grid, BoundFamily, BoundarySharpening, CmsError,
    CmsReport, CmsReportKind, CmsRow, FDiagnostic, HermitePolynomial, InterpolationCondition,
    Interval, MajorantSide, MeasureQuery, PiecewiseBounds, PoleGeometry, RationalMajorant,
    SandwichBounds,
};
pub use krylov::{DecompositionKind, KrylovDecomposition, KrylovError, PoleSpec};
pub use qor::{qor_fun_approx, qor_poly, qor_rational_sai, rational_qor_fun_approx, QorError};
pub use quadrature::{
    exact_reference, rule_from_decomposition, ExactnessClass, QuadratureError, QuadratureRule,
    StepDistribution,
};
pub use linalg::{
    laplacian_1d, random_unit_vector, CMatrix, CVector, EigenDecomposition, HermitianOperator,
    InnerProduct, LinalgError, ToleranceProfile,
};
