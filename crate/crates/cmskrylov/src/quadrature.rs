//! Quadrature objects extracted from spectral data: the exact reference
//! distribution of a starting vector, Gaussian-type rules read off small
//! representation matrices, and moment-based exactness verification.
//!
//! The spectral distribution of `u` with respect to `A` is the step
//! function that jumps by `|w_j|² = |(q_j,u)_M|²` at each eigenvalue
//! `λ_j`; a decomposition's rule jumps by the Christoffel numbers
//! `|c_j|² = |(q̂_j,x)₂|²` at the representation eigenvalues `θ_j`. The
//! rule integrates the reference exactly on a class of (rational)
//! functions determined by the decomposition kind, which
//! [`check_polynomial_exactness`] and [`check_rational_exactness`] verify
//! by brute-force moment comparison in an affinely normalized variable.

use num_complex::Complex64;

use crate::krylov::{DecompositionKind, KrylovDecomposition};
use crate::linalg::eig::tridiag_eig_project;
use crate::linalg::solve::{adjoint_backward_substitute, lower_adjoint_matvec};
use crate::linalg::{
    hermitian_eig, vdot, CMatrix, HermitianOperator, LinalgError, OperatorData, ToleranceProfile,
};

/// Errors from distribution and rule construction.
#[derive(Debug, thiserror::Error)]
pub enum QuadratureError {
    #[error("nodes must be strictly ascending: node {index} is {value} after {previous}")]
    NodesNotAscending { index: usize, value: f64, previous: f64 },
    #[error("weight {index} is {value}; step distributions need positive weights")]
    NonpositiveWeight { index: usize, value: f64 },
    #[error("node {index} = {value} lies outside the support hint ({a}, {b})")]
    NodeOutsideSupport { index: usize, value: f64, a: f64, b: f64 },
    #[error(
        "representation eigenvalues {lower} and {upper} are closer than {threshold}; \
         quadrature extraction requires distinct nodes"
    )]
    DegenerateNodes { lower: f64, upper: f64, threshold: f64 },
    #[error("pole {s} is only {distance} away from a distribution node")]
    PoleCollision { s: Complex64, distance: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A nonnegative step function given by strictly ascending jump locations
/// and positive jump heights, together with an open interval `(a,b)`
/// strictly containing every node.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    support: (f64, f64),
    total: f64,
}

impl StepDistribution {
    /// Validates strict node ascent, weight positivity and containment in
    /// the support hint.
    pub fn new(
        nodes: Vec<f64>,
        weights: Vec<f64>,
        support: (f64, f64),
    ) -> Result<Self, QuadratureError> {
        assert_eq!(nodes.len(), weights.len(), "node/weight length mismatch");
        for (index, pair) in nodes.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(QuadratureError::NodesNotAscending {
                    index: index + 1,
                    value: pair[1],
                    previous: pair[0],
                });
            }
        }
        for (index, &w) in weights.iter().enumerate() {
            if w.is_nan() || w <= 0.0 {
                return Err(QuadratureError::NonpositiveWeight { index, value: w });
            }
        }
        let (a, b) = support;
        for (index, &x) in nodes.iter().enumerate() {
            if x <= a || x >= b {
                return Err(QuadratureError::NodeOutsideSupport { index, value: x, a, b });
            }
        }
        let total = weights.iter().sum();
        Ok(StepDistribution { nodes, weights, support, total })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Total mass `Σ weights = α(b)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Right-continuous evaluation `α(x) = Σ_{node ≤ x} weight`.
    pub fn alpha(&self, x: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .take_while(|(node, _)| **node <= x)
            .map(|(_, w)| w)
            .sum()
    }

    /// Left limit `α(x−) = Σ_{node < x} weight`, the measure of `(a, x)`
    /// relative to the left endpoint.
    pub fn alpha_left(&self, x: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .take_while(|(node, _)| **node < x)
            .map(|(_, w)| w)
            .sum()
    }

    /// Measure of the closed interval `[x, y]`.
    pub fn measure_closed(&self, x: f64, y: f64) -> f64 {
        if y < x {
            return 0.0;
        }
        self.alpha(y) - self.alpha_left(x)
    }

    /// Measure of the open interval `(x, y)`.
    pub fn measure_open(&self, x: f64, y: f64) -> f64 {
        if y <= x {
            return 0.0;
        }
        self.alpha_left(y) - self.alpha(x)
    }
}

/// The function class a quadrature rule integrates exactly against its
/// reference distribution. Rational denominators are the even powers
/// `|λ−s|^{2·denominator_power}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactnessClass {
    Polynomial { degree: usize },
    RationalReal { s: f64, denominator_power: usize, numerator_degree: usize },
    RationalComplex { s: Complex64, denominator_power: usize, numerator_degree: usize },
    Laurent { s: f64, denominator_power: usize, numerator_degree: usize },
}

impl ExactnessClass {
    /// Largest numerator degree integrated exactly.
    pub fn numerator_degree(&self) -> usize {
        match *self {
            ExactnessClass::Polynomial { degree } => degree,
            ExactnessClass::RationalReal { numerator_degree, .. }
            | ExactnessClass::RationalComplex { numerator_degree, .. }
            | ExactnessClass::Laurent { numerator_degree, .. } => numerator_degree,
        }
    }

    /// Power of `|λ−s|²` in the denominator (`0` for polynomial classes).
    pub fn denominator_power(&self) -> usize {
        match *self {
            ExactnessClass::Polynomial { .. } => 0,
            ExactnessClass::RationalReal { denominator_power, .. }
            | ExactnessClass::RationalComplex { denominator_power, .. }
            | ExactnessClass::Laurent { denominator_power, .. } => denominator_power,
        }
    }
}

/// A quadrature rule: nodes `θ_j` with Christoffel weights `|c_j|²`, the
/// exactness class inherited from the decomposition, and the kind it came
/// from.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dist: StepDistribution,
    pub exactness: ExactnessClass,
    pub kind: DecompositionKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }
}

/// Support hint enclosing the given extremes with a tenth of the spread
/// (or a tenth of the magnitude when the spread vanishes) of padding on
/// each side.
fn padded_support(lo: f64, hi: f64) -> (f64, f64) {
    let spread = hi - lo;
    let pad = if spread > 0.0 {
        spread / 10.0
    } else {
        lo.abs().max(1.0) / 10.0
    };
    (lo - pad, hi + pad)
}

/// The exact spectral distribution of `u`: a step function jumping by
/// `|w_j|² = |(q_j,u)_M|²` at each eigenvalue of `A`, with weights merged
/// across (numerically) degenerate eigenvalues and jumps below the weight
/// floor dropped. Its total is `‖u‖²_M`.
///
/// Real tridiagonal operators under the identity metric use a projected
/// QL iteration that never forms the eigenvector matrix; everything else
/// goes through a dense eigendecomposition (of `LᴴAL⁻ᴴ` when a metric
/// `M = LLᴴ` is installed).
pub fn exact_reference(
    a: &HermitianOperator,
    u: &[Complex64],
    tol: &ToleranceProfile,
) -> Result<StepDistribution, QuadratureError> {
    let ip = a.inner_product();
    let (lambda, mass): (Vec<f64>, Vec<f64>) = match (a.data(), ip.is_identity()) {
        (OperatorData::Tridiagonal { diag, offdiag }, true) => {
            let (values, coeffs) = tridiag_eig_project(diag, offdiag, u, tol)?;
            let mass = coeffs.iter().map(|c| c.norm_sqr()).collect();
            (values, mass)
        }
        _ => {
            let dense = a.to_dense();
            match ip.cholesky() {
                None => {
                    let eig = hermitian_eig(&dense, tol)?;
                    let mass = (0..dense.nrows())
                        .map(|j| vdot(eig.eigenvectors.column(j), u).norm_sqr())
                        .collect();
                    (eig.eigenvalues, mass)
                }
                Some(l) => {
                    // B = Lᴴ A L⁻ᴴ is Hermitian and similar to A; its
                    // eigenvectors are the metric-orthonormal ones of A
                    // pushed forward by Lᴴ.
                    let n = dense.nrows();
                    let mut b = CMatrix::zeros(n, n);
                    for j in 0..n {
                        let mut z = vec![Complex64::new(0.0, 0.0); n];
                        z[j] = Complex64::new(1.0, 0.0);
                        adjoint_backward_substitute(l, &mut z);
                        let col = lower_adjoint_matvec(l, &dense.matvec(&z));
                        for i in 0..n {
                            b[(i, j)] = col[i];
                        }
                    }
                    b.hermitize();
                    let eig = hermitian_eig(&b, tol)?;
                    let pushed = lower_adjoint_matvec(l, u);
                    let mass = (0..n)
                        .map(|j| vdot(eig.eigenvectors.column(j), &pushed).norm_sqr())
                        .collect();
                    (eig.eigenvalues, mass)
                }
            }
        }
    };

    let lo = lambda.first().copied().unwrap_or(0.0);
    let hi = lambda.last().copied().unwrap_or(0.0);
    let merge_gap = tol.degenerate_merge * (hi - lo).max(f64::MIN_POSITIVE);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut i = 0;
    while i < lambda.len() {
        let mut j = i + 1;
        while j < lambda.len() && lambda[j] - lambda[j - 1] <= merge_gap {
            j += 1;
        }
        let weight: f64 = mass[i..j].iter().sum();
        let node = lambda[i..j].iter().sum::<f64>() / (j - i) as f64;
        nodes.push(node);
        weights.push(weight);
        i = j;
    }
    let norm_sq = ip.norm(u).powi(2);
    let floor = tol.weight_floor * norm_sq;
    let kept: Vec<(f64, f64)> = nodes
        .into_iter()
        .zip(weights)
        .filter(|(_, w)| *w > floor)
        .collect();
    let (nodes, weights): (Vec<f64>, Vec<f64>) = kept.into_iter().unzip();
    StepDistribution::new(nodes, weights, padded_support(lo, hi))
}

/// Reads the quadrature rule off a decomposition: nodes are the
/// representation's eigenvalues, weights the squared moduli of
/// `c_j = (q̂_j, x)₂`, and the exactness class follows the kind.
///
/// # Errors
/// `DegenerateNodes` when representation eigenvalues coincide to within
/// the distinctness tolerance (the constructions assume simple nodes).
pub fn rule_from_decomposition(
    dec: &KrylovDecomposition,
    tol: &ToleranceProfile,
) -> Result<QuadratureRule, QuadratureError> {
    let eig = hermitian_eig(&dec.rep, tol)?;
    let theta = &eig.eigenvalues;
    let m = theta.len();
    let threshold = tol.rule_distinct * dec.rep.norm_fro().max(f64::MIN_POSITIVE);
    for pair in theta.windows(2) {
        if pair[1] - pair[0] <= threshold {
            return Err(QuadratureError::DegenerateNodes {
                lower: pair[0],
                upper: pair[1],
                threshold,
            });
        }
    }
    let weights: Vec<f64> = (0..m)
        .map(|j| vdot(eig.eigenvectors.column(j), &dec.x).norm_sqr())
        .collect();
    let dist = StepDistribution::new(
        theta.clone(),
        weights,
        padded_support(theta[0], theta[m - 1]),
    )?;
    let exactness = match dec.kind {
        DecompositionKind::Polynomial => ExactnessClass::Polynomial { degree: 2 * m - 1 },
        DecompositionKind::QorPoly { .. } => ExactnessClass::Polynomial { degree: 2 * m - 2 },
        DecompositionKind::SaIReal { s } => ExactnessClass::RationalReal {
            s,
            denominator_power: m - 1,
            numerator_degree: 2 * m - 1,
        },
        DecompositionKind::SaIComplex { s } => ExactnessClass::RationalComplex {
            s,
            denominator_power: m - 1,
            numerator_degree: 2 * m - 1,
        },
        DecompositionKind::QorRational { s, .. } => {
            if s.im == 0.0 {
                ExactnessClass::RationalReal {
                    s: s.re,
                    denominator_power: m - 1,
                    numerator_degree: 2 * m - 2,
                }
            } else {
                ExactnessClass::RationalComplex {
                    s,
                    denominator_power: m - 1,
                    numerator_degree: 2 * m - 2,
                }
            }
        }
        DecompositionKind::Extended { rho, s } => ExactnessClass::Laurent {
            s,
            denominator_power: rho - 1,
            numerator_degree: 2 * m - 1,
        },
    };
    Ok(QuadratureRule { dist, exactness, kind: dec.kind })
}

/// Affine normalization `t = (λ − mid)/halfwidth` of the reference's
/// support hint, keeping moment evaluation well scaled at high degree.
fn normalization(reference: &StepDistribution) -> (f64, f64) {
    let (a, b) = reference.support();
    ((a + b) / 2.0, (b - a) / 2.0)
}

fn moment(nodes: &[f64], weights: &[f64], mid: f64, half: f64, degree: usize) -> f64 {
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * ((x - mid) / half).powi(degree as i32))
        .sum()
}

fn moment_scale(reference: &StepDistribution, mid: f64, half: f64, degree: usize) -> f64 {
    reference
        .nodes()
        .iter()
        .zip(reference.weights())
        .map(|(x, w)| w * ((x - mid) / half).abs().max(1.0).powi(degree as i32))
        .sum()
}

/// Relative moment errors `|Σ|c_j|²t_j^d − Σ|w_i|²t_i^d| / scale_d` for
/// `d = 0..=max_degree`, evaluated in the normalized variable. A rule
/// with polynomial exactness degree `D` produces errors at numerical
/// noise level for all `d ≤ D` and generically large errors beyond.
pub fn check_polynomial_exactness(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    max_degree: usize,
) -> Vec<f64> {
    let (mid, half) = normalization(reference);
    (0..=max_degree)
        .map(|d| {
            let own = moment(rule.dist.nodes(), rule.dist.weights(), mid, half, d);
            let target = moment(reference.nodes(), reference.weights(), mid, half, d);
            (own - target).abs() / moment_scale(reference, mid, half, d)
        })
        .collect()
}

fn rational_moment(
    nodes: &[f64],
    weights: &[f64],
    mid: f64,
    half: f64,
    ts: Complex64,
    power: usize,
    degree: usize,
) -> f64 {
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let t = (x - mid) / half;
            let denom = ((t - ts.re).powi(2) + ts.im.powi(2)).powi(power as i32);
            w * t.powi(degree as i32) / denom
        })
        .sum()
}

/// Relative moment errors for the rational class
/// `r_d(λ) = λ^d / |λ−s|^{2p}`, with `p` taken from the rule's exactness
/// tag, for `d = 0..=max_degree`. The pole and both distributions are
/// normalized by the same affine map, which leaves the class invariant.
///
/// # Errors
/// `PoleCollision` when a real pole sits (numerically) on a node of
/// either distribution.
pub fn check_rational_exactness(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    s: Complex64,
    max_degree: usize,
    tol: &ToleranceProfile,
) -> Result<Vec<f64>, QuadratureError> {
    let (mid, half) = normalization(reference);
    if s.im == 0.0 {
        let distance = reference
            .nodes()
            .iter()
            .chain(rule.dist.nodes())
            .map(|x| (x - s.re).abs())
            .fold(f64::INFINITY, f64::min);
        if distance <= tol.rule_distinct * 2.0 * half {
            return Err(QuadratureError::PoleCollision { s, distance });
        }
    }
    let power = match rule.exactness {
        ExactnessClass::Polynomial { .. } => rule.len().saturating_sub(1),
        tagged => tagged.denominator_power(),
    };
    let ts = (s - Complex64::new(mid, 0.0)) / half;
    let errors = (0..=max_degree)
        .map(|d| {
            let own = rational_moment(
                rule.dist.nodes(),
                rule.dist.weights(),
                mid,
                half,
                ts,
                power,
                d,
            );
            let target =
                rational_moment(reference.nodes(), reference.weights(), mid, half, ts, power, d);
            let scale: f64 = reference
                .nodes()
                .iter()
                .zip(reference.weights())
                .map(|(x, w)| {
                    let t = (x - mid) / half;
                    let denom = ((t - ts.re).powi(2) + ts.im.powi(2)).powi(power as i32);
                    w * t.abs().max(1.0).powi(d as i32) / denom
                })
                .sum();
            (own - target).abs() / scale
        })
        .collect();
    Ok(errors)
}

/// Moment-matching report: `true` for every order `j ≤ order` whose
/// relative moment error is below the exactness pass tolerance.
pub fn matching_moments(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    order: usize,
    tol: &ToleranceProfile,
) -> Vec<bool> {
    check_polynomial_exactness(rule, reference, order)
        .into_iter()
        .map(|err| err <= tol.exactness_pass)
        .collect()
}
