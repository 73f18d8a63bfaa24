//! Two-sided separation bounds on the spectral distribution function.
//!
//! The exact spectral distribution `α_n` of a starting vector jumps at every
//! eigenvalue of the operator and is expensive to obtain, while the step
//! distribution `α_m` of an `m`-point quadrature rule is cheap.  This module
//! quantifies how tightly the two interlace: accumulated rule weights pin the
//! exact measure of the regions between consecutive nodes, and the pinning is
//! certified by explicit majorant/minorant functions that sandwich step
//! indicators inside the rule's exactness class.
//!
//! * For polynomial rules ([`cms_polynomial`]) every prefix of accumulated
//!   weights lies strictly between `α_n` evaluated at the surrounding nodes,
//!   and rearranging the prefixes yields computable two-sided estimates of
//!   the mass in every inter-node interval ([`cms_piecewise_polynomial`]).
//! * For rules with a real pole `s` ([`cms_rational_real`]) the same pattern
//!   holds after splitting the real line at `s`; the index and region
//!   bookkeeping lives in [`PoleGeometry`], and a prefix form holds up to the
//!   computable offset `γ = α_n(s) − α_m(s)`.
//! * For complex poles ([`cms_complex_upper`]) paired weights dominate the
//!   measure of closed inter-node intervals (upper bounds only).
//! * Rules from extended subspaces with a pole below the spectrum behave
//!   exactly like polynomial rules ([`cms_extended`]).
//!
//! Bound violations are reported with their margins, never raised: a failed
//! inequality signals numerical breakdown worth inspecting, not caller
//! error.  A row counts as numerically strict only when its margin clears
//! a tolerance proportional to the total mass.
//!
//! The certifying functions are built by confluent Newton interpolation
//! ([`HermitePolynomial`], [`majorant_polynomial`]); their rational
//! counterparts ([`rational_majorant`]) transplant the polynomial
//! construction through the transform `y = (λ − s)⁻¹`.

use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Value};
use thiserror::Error;

use crate::krylov::DecompositionKind;
use crate::linalg::ToleranceProfile;
use crate::quadrature::{QuadratureRule, StepDistribution};

/// Everything that can go wrong while assembling bounds or majorants.
#[derive(Debug, Error)]
pub enum CmsError {
    #[error("rule kind {kind:?} is not accepted by this bound family")]
    WrongKind { kind: DecompositionKind },
    #[error("pole {s} collides with quadrature node {theta} (distance {distance:.3e})")]
    PoleOnNode { s: f64, theta: f64, distance: f64 },
    #[error("pole {s} must lie strictly below {bound} for this bound family")]
    PoleNotBelow { s: f64, bound: f64 },
    #[error("pole {s} lies outside the open node interval ({lo}, {hi})")]
    PoleOutsideNodes { s: f64, lo: f64, hi: f64 },
    #[error("a real pole is required; got {s}")]
    ComplexPole { s: Complex64 },
    #[error("index {k} is out of range for {m} nodes")]
    IndexOutOfRange { k: usize, m: usize },
    #[error("index {k} is the wrap-around position; no two-sided bound exists there")]
    ExcludedIndex { k: usize },
    #[error("nodes must be strictly ascending: node {index} is {value} after {previous}")]
    NodesNotAscending { index: usize, value: f64, previous: f64 },
    #[error("at least {min} nodes are required; got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("{m} nodes exceed the cap of {cap} for majorant construction in double precision")]
    TooManyNodes { m: usize, cap: usize },
    #[error("construction lost accuracy: defect {defect:.3e} exceeds {tol:.3e}")]
    Conditioning { defect: f64, tol: f64 },
}

// ---------------------------------------------------------------------------
// Measurable sets and the measure of a step distribution
// ---------------------------------------------------------------------------

/// One contiguous piece of a measurable set: an interval whose endpoints are
/// individually tagged open or closed.  Infinite endpoints stand for "beyond
/// every node and eigenvalue" on that side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    lo_closed: bool,
    hi: f64,
    hi_closed: bool,
}

impl Interval {
    /// `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, lo_closed: true, hi, hi_closed: true }
    }

    /// `(lo, hi)`.
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, lo_closed: false, hi, hi_closed: false }
    }

    /// `(lo, hi]`.
    pub fn open_closed(lo: f64, hi: f64) -> Self {
        Interval { lo, lo_closed: false, hi, hi_closed: true }
    }

    /// `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Interval { lo, lo_closed: true, hi, hi_closed: false }
    }

    /// Left endpoint.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Right endpoint.
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Whether the left endpoint belongs to the interval.
    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    /// Whether the right endpoint belongs to the interval.
    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    /// Membership honoring the endpoint tags.
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// True when no point satisfies both endpoint constraints.  Intervals
    /// with a NaN endpoint are empty by this definition and get dropped
    /// during query normalization.
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{},{}{}", open, self.lo, self.hi, close)
    }
}

/// A finite union of tagged intervals, kept sorted and disjoint.
///
/// Overlapping or touching pieces are merged during construction, so the
/// measure of the union never double-counts a node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeasureQuery {
    pieces: Vec<Interval>,
}

impl MeasureQuery {
    /// Normalizes a list of intervals into a sorted disjoint union; empty
    /// pieces are dropped, overlapping or touching ones merged.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut pieces: Vec<Interval> =
            intervals.into_iter().filter(|piece| !piece.is_empty()).collect();
        pieces.sort_by(|p, q| p.lo.total_cmp(&q.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for piece in pieces {
            match merged.last_mut() {
                Some(last)
                    if piece.lo < last.hi
                        || (piece.lo == last.hi && (last.hi_closed || piece.lo_closed)) =>
                {
                    if piece.lo == last.lo {
                        last.lo_closed |= piece.lo_closed;
                    }
                    if piece.hi > last.hi {
                        last.hi = piece.hi;
                        last.hi_closed = piece.hi_closed;
                    } else if piece.hi == last.hi {
                        last.hi_closed |= piece.hi_closed;
                    }
                }
                _ => merged.push(piece),
            }
        }
        MeasureQuery { pieces: merged }
    }

    /// A query of a single interval.
    pub fn interval(piece: Interval) -> Self {
        Self::from_intervals([piece])
    }

    /// The normalized pieces, ascending and disjoint.
    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    /// Membership in the union.
    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|piece| piece.contains(x))
    }

    /// True when the union is empty.
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }
}

impl fmt::Display for MeasureQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        for (i, piece) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{piece}")?;
        }
        Ok(())
    }
}

/// The mass a step distribution assigns to a set: the sum of the weights
/// whose node lies in the union, honoring open/closed endpoint tags exactly.
/// Left limits are obtained by querying open intervals, never by nudging
/// endpoints.
pub fn measure(dist: &StepDistribution, query: &MeasureQuery) -> f64 {
    dist.nodes()
        .iter()
        .zip(dist.weights())
        .filter(|&(&node, _)| query.contains(node))
        .map(|(_, &weight)| weight)
        .sum()
}

/// Repackages a rule as the step distribution `α_m` with jumps `|c_j|²` at
/// the nodes `θ_j`.  Rules already carry this distribution; the function
/// exists so that bound tables and diagnostics can treat both sides of a
/// comparison uniformly.
pub fn alpha_m_from_rule(rule: &QuadratureRule) -> StepDistribution {
    rule.dist.clone()
}

// ---------------------------------------------------------------------------
// Pole geometry: index sets, regions, and the index map for a real pole
// ---------------------------------------------------------------------------

/// Node/pole bookkeeping for bounds with a real pole `s`.
///
/// The pole splits the ascending nodes `θ_1 < … < θ_m` into the part below
/// and the part above: when `θ_1 < s < θ_m`, the index `k_m` is the last
/// node below the pole and `k_1 = k_m + 1` the first above; otherwise
/// `k_1 = 1` and `k_m = m`.  Accumulation then proceeds cyclically from
/// `k_1`: the index set `I_k` collects `{k_1, …, k}` and wraps past `m`
/// into `{1, …, k}`, and the region `R_k` collects the part of the line
/// swept from the pole to `θ_k` (wrapping around the far end when
/// `θ_k < s`).
#[derive(Clone, Debug)]
pub struct PoleGeometry {
    s: f64,
    nodes: Vec<f64>,
    support: (f64, f64),
    k1: usize,
    km: usize,
}

impl PoleGeometry {
    /// Classifies `s` against the ascending `nodes`.  The `support`
    /// interval `(a, b)` is used as the outer boundary of wrapped regions.
    ///
    /// # Errors
    ///
    /// `NodesNotAscending`, `TooFewNodes`, or `PoleOnNode` when `s` is
    /// within `rule_distinct` (relative) of a node.
    pub fn new(
        nodes: &[f64],
        s: f64,
        support: (f64, f64),
        tol: &ToleranceProfile,
    ) -> Result<Self, CmsError> {
        let m = nodes.len();
        if m < 1 {
            return Err(CmsError::TooFewNodes { min: 1, got: m });
        }
        for i in 1..m {
            if nodes[i] <= nodes[i - 1] {
                return Err(CmsError::NodesNotAscending {
                    index: i,
                    value: nodes[i],
                    previous: nodes[i - 1],
                });
            }
        }
        let scale = (nodes[m - 1] - nodes[0]).max(s.abs()).max(1.0);
        for &theta in nodes {
            let distance = (theta - s).abs();
            if distance <= tol.rule_distinct * scale {
                return Err(CmsError::PoleOnNode { s, theta, distance });
            }
        }
        let (k1, km) = if s > nodes[0] && s < nodes[m - 1] {
            let below = nodes.iter().take_while(|&&theta| theta < s).count();
            (below + 1, below)
        } else {
            (1, m)
        };
        Ok(PoleGeometry { s, nodes: nodes.to_vec(), support, k1, km })
    }

    /// The pole.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Number of nodes `m`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when there are no nodes (never, for geometries built by `new`).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// First accumulation index (1-based): the first node above the pole,
    /// or 1 when the pole is outside the node interval.
    pub fn k1(&self) -> usize {
        self.k1
    }

    /// Wrap-around index (1-based): the last node below an interior pole,
    /// or `m` when the pole is outside the node interval.
    pub fn km(&self) -> usize {
        self.km
    }

    /// The involutory index map that sorts the transformed nodes
    /// `(θ_j − s)⁻¹` ascending: `ι(j) = k_1 − j` below `k_1` and
    /// `m + k_1 − j` from `k_1` on.  Both `j` and the result are 1-based.
    pub fn iota(&self, j: usize) -> usize {
        debug_assert!(j >= 1 && j <= self.nodes.len());
        if j < self.k1 {
            self.k1 - j
        } else {
            self.nodes.len() + self.k1 - j
        }
    }

    /// The nodes pushed through `y = (θ − s)⁻¹` and sorted ascending;
    /// entry `j − 1` holds the transform of node `ι(j)`.
    pub fn transformed_nodes(&self) -> Vec<f64> {
        (1..=self.nodes.len()).map(|j| (self.nodes[self.iota(j) - 1] - self.s).recip()).collect()
    }

    /// The 1-based index set `I_k`: `{1..k} ∪ {k_1..m}` before the
    /// wrap-around index, `{k_1..k}` from `k_1` on.
    pub fn index_set(&self, k: usize) -> Vec<usize> {
        let m = self.nodes.len();
        debug_assert!(k >= 1 && k <= m);
        if k < self.k1 {
            (1..=k).chain(self.k1..=m).collect()
        } else {
            (self.k1..=k).collect()
        }
    }

    /// The region `R_k` swept from the pole to `θ_k`, closed at the node:
    /// `(s, θ_k]` when `θ_k > s`, and `(a, θ_k] ∪ (s, b)` when the sweep
    /// wraps around the support boundary.  `k = m + 1` wraps to `R_1`.
    pub fn region(&self, k: usize) -> MeasureQuery {
        self.region_with(k, true)
    }

    /// The interior of [`region`](Self::region): open at the node.
    pub fn region_open(&self, k: usize) -> MeasureQuery {
        self.region_with(k, false)
    }

    fn region_with(&self, k: usize, closed_at_node: bool) -> MeasureQuery {
        let m = self.nodes.len();
        let k = if k == m + 1 { 1 } else { k };
        debug_assert!(k >= 1 && k <= m);
        let theta = self.nodes[k - 1];
        let (a, b) = self.support;
        let up_to_node = |lo: f64| {
            if closed_at_node {
                Interval::open_closed(lo, theta)
            } else {
                Interval::open(lo, theta)
            }
        };
        if theta > self.s {
            MeasureQuery::from_intervals([up_to_node(self.s)])
        } else {
            MeasureQuery::from_intervals([up_to_node(a), Interval::open(self.s, b)])
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One bound row: `lower ≤ value ≤ upper` where `value` accumulates rule
/// weights over the row's index set.  `margin` is the smaller of the two
/// slacks; a row is numerically strict when the margin clears
/// `cms_strict · total`.  Equality rows (the mass identity at the
/// wrap-around index) carry `lower == upper == target`, a margin of minus
/// the residual magnitude, and are never flagged strict.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmsRow {
    pub k: usize,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub strict: bool,
    pub margin: f64,
}

/// Which bound family a report belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CmsReportKind {
    /// Prefix bounds for polynomial (plain or bordered Jacobi) rules.
    Polynomial,
    /// Cyclic region bounds for rules with a real pole `s`.
    RationalReal { s: f64 },
    /// Upper bounds from paired weights for rules with a complex pole.
    ComplexUpper { s: Complex64 },
    /// Prefix bounds for extended rules with a real pole below the spectrum.
    Extended { s: f64 },
}

impl CmsReportKind {
    /// Stable lowercase tag used in serialized output.
    pub fn label(&self) -> &'static str {
        match self {
            CmsReportKind::Polynomial => "polynomial",
            CmsReportKind::RationalReal { .. } => "rational-real",
            CmsReportKind::ComplexUpper { .. } => "complex-upper",
            CmsReportKind::Extended { .. } => "extended",
        }
    }
}

/// A full separation report: per-index bound rows, the pole offset `γ`
/// when one exists, and (for real-pole rules) the prefix form shifted
/// by `γ`.
#[derive(Clone, Debug)]
pub struct CmsReport {
    pub kind: CmsReportKind,
    /// `γ = α_n(s) − α_m(s)` for real-pole rules, `None` otherwise.
    pub gamma: Option<f64>,
    /// The main bound rows, one per index `k`.
    pub rows: Vec<CmsRow>,
    /// Prefix-sum rows shifted by `γ` (real-pole rules only; the final row
    /// wraps cyclically and is present only when the wrap-around index is
    /// interior).
    pub shifted_rows: Vec<CmsRow>,
}

fn row_json(row: &CmsRow) -> Value {
    json!({
        "k": row.k,
        "lower": row.lower,
        "value": row.value,
        "upper": row.upper,
        "strict": row.strict,
        "margin": row.margin,
    })
}

fn push_row_csv(out: &mut String, family: &str, row: &CmsRow) {
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        family, row.k, row.lower, row.value, row.upper, row.strict, row.margin
    ));
}

impl CmsReport {
    /// JSON value with the kind tag, shift, `γ`, and all rows.  Non-finite
    /// bounds (the missing upper bounds of complex-pole rows) serialize
    /// as `null`.
    pub fn to_json(&self) -> Value {
        let shift = match self.kind {
            CmsReportKind::Polynomial => Value::Null,
            CmsReportKind::RationalReal { s } | CmsReportKind::Extended { s } => json!(s),
            CmsReportKind::ComplexUpper { s } => json!({ "re": s.re, "im": s.im }),
        };
        json!({
            "kind": self.kind.label(),
            "shift": shift,
            "gamma": self.gamma,
            "rows": self.rows.iter().map(row_json).collect::<Vec<_>>(),
            "shifted_rows": self.shifted_rows.iter().map(row_json).collect::<Vec<_>>(),
        })
    }

    /// CSV with one line per row; the leading column distinguishes the
    /// main rows from the shifted prefix rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,k,lower,value,upper,strict,margin\n");
        for row in &self.rows {
            push_row_csv(&mut out, "bounds", row);
        }
        for row in &self.shifted_rows {
            push_row_csv(&mut out, "shifted", row);
        }
        out
    }
}

fn bounded_row(
    k: usize,
    lower: f64,
    value: f64,
    upper: f64,
    total: f64,
    tol: &ToleranceProfile,
) -> CmsRow {
    let margin = (value - lower).min(upper - value);
    CmsRow { k, lower, value, upper, strict: margin > tol.cms_strict * total, margin }
}

fn identity_row(k: usize, value: f64, target: f64) -> CmsRow {
    CmsRow { k, lower: target, value, upper: target, strict: false, margin: -(value - target).abs() }
}

/// The prefix rows shared by the polynomial and extended bound families:
/// row `k < m` asserts `α_n(θ_k) < Σ_{j≤k} |c_j|² < α_n(θ_{k+1}−)`, and
/// row `m` records the mass identity `Σ |c_j|² = α_n(b)`.
fn prefix_rows(
    dist: &StepDistribution,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Vec<CmsRow> {
    let theta = dist.nodes();
    let weights = dist.weights();
    let m = theta.len();
    let total = reference.total();
    let mut rows = Vec::with_capacity(m);
    let mut acc = 0.0;
    for k in 1..m {
        acc += weights[k - 1];
        rows.push(bounded_row(
            k,
            reference.alpha(theta[k - 1]),
            acc,
            reference.alpha_left(theta[k]),
            total,
            tol,
        ));
    }
    acc += weights[m - 1];
    rows.push(identity_row(m, acc, total));
    rows
}

/// Separation bounds for a polynomial rule: each prefix of accumulated
/// weights is pinned between the reference distribution at the node and
/// its left limit at the next node.  Bound violations show up as negative
/// margins; nothing is raised for them.
///
/// # Errors
///
/// `WrongKind` unless the rule stems from a polynomial subspace (plain or
/// with a preassigned node).
pub fn cms_polynomial(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<CmsReport, CmsError> {
    match rule.kind {
        DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => {}
        kind => return Err(CmsError::WrongKind { kind }),
    }
    Ok(CmsReport {
        kind: CmsReportKind::Polynomial,
        gamma: None,
        rows: prefix_rows(&rule.dist, reference, tol),
        shifted_rows: Vec::new(),
    })
}

/// Separation bounds for an extended rule whose pole sits below the
/// spectrum; the rows have the same prefix shape as [`cms_polynomial`].
///
/// # Errors
///
/// `WrongKind` for non-extended rules; `PoleNotBelow` when the pole is not
/// strictly below both the first reference node and the first rule node.
pub fn cms_extended(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<CmsReport, CmsError> {
    let s = match rule.kind {
        DecompositionKind::Extended { s, .. } => s,
        kind => return Err(CmsError::WrongKind { kind }),
    };
    let lambda1 = reference.nodes().first().copied().unwrap_or(f64::INFINITY);
    let theta1 = rule.dist.nodes().first().copied().unwrap_or(f64::INFINITY);
    let bound = lambda1.min(theta1);
    if s >= bound {
        return Err(CmsError::PoleNotBelow { s, bound });
    }
    Ok(CmsReport {
        kind: CmsReportKind::Extended { s },
        gamma: None,
        rows: prefix_rows(&rule.dist, reference, tol),
        shifted_rows: Vec::new(),
    })
}

fn real_pole(kind: &DecompositionKind) -> Result<f64, CmsError> {
    match *kind {
        DecompositionKind::SaIReal { s } => Ok(s),
        DecompositionKind::QorRational { s, .. } if s.im == 0.0 => Ok(s.re),
        DecompositionKind::QorRational { s, .. } => Err(CmsError::ComplexPole { s }),
        kind => Err(CmsError::WrongKind { kind }),
    }
}

/// Separation bounds for a rule with a real pole `s`.
///
/// The main rows follow the cyclic pattern: for every index `k` except the
/// wrap-around index `k_m`, the weights accumulated over `I_k` are pinned
/// between the reference measures of `R_k` and of the interior of
/// `R_{k+1}` (with `R_{m+1}` wrapping to `R_1`); the `k_m` row records the
/// mass identity.  The shifted rows restate the bounds in prefix form up
/// to the offset `γ = α_n(s) − α_m(s)`, which the report also carries;
/// when the wrap-around index is interior, a final cyclic row pins the
/// shifted total between `α_n(θ_m)` and `α_n(b) + α_n(θ_1−)`.
///
/// # Errors
///
/// `WrongKind`/`ComplexPole` for rules without a real pole; `PoleOnNode`
/// when `s` collides with a node.
pub fn cms_rational_real(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<CmsReport, CmsError> {
    let s = real_pole(&rule.kind)?;
    let dist = &rule.dist;
    let theta = dist.nodes();
    let weights = dist.weights();
    let m = theta.len();
    let geom = PoleGeometry::new(theta, s, reference.support(), tol)?;
    let total = reference.total();
    let gamma = reference.alpha(s) - dist.alpha(s);

    let mut rows = Vec::with_capacity(m);
    for k in 1..=m {
        if k == geom.km() {
            rows.push(identity_row(k, dist.total(), total));
            continue;
        }
        let value: f64 = geom.index_set(k).iter().map(|&j| weights[j - 1]).sum();
        let lower = measure(reference, &geom.region(k));
        let upper = measure(reference, &geom.region_open(k + 1));
        rows.push(bounded_row(k, lower, value, upper, total, tol));
    }

    let mut shifted_rows = Vec::with_capacity(m);
    let mut acc = 0.0;
    for k in 1..m {
        acc += weights[k - 1];
        shifted_rows.push(bounded_row(
            k,
            reference.alpha(theta[k - 1]),
            acc + gamma,
            reference.alpha_left(theta[k]),
            total,
            tol,
        ));
    }
    if geom.km() != m {
        let value = acc + weights[m - 1] + gamma;
        shifted_rows.push(bounded_row(
            m,
            reference.alpha(theta[m - 1]),
            value,
            total + reference.alpha_left(theta[0]),
            total,
            tol,
        ));
    }

    Ok(CmsReport {
        kind: CmsReportKind::RationalReal { s },
        gamma: Some(gamma),
        rows,
        shifted_rows,
    })
}

/// Upper bounds for a rule with a complex pole: the measure of each closed
/// inter-node interval is dominated by the two adjacent weights, and the
/// mass outside the node range by the two extreme weights.  Rows carry an
/// infinite upper bound (serialized as `null`) since this family provides
/// no lower counterpart.
///
/// # Errors
///
/// `WrongKind` unless the rule stems from a shift-and-invert subspace with
/// a complex shift.
pub fn cms_complex_upper(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<CmsReport, CmsError> {
    let s = match rule.kind {
        DecompositionKind::SaIComplex { s } => s,
        kind => return Err(CmsError::WrongKind { kind }),
    };
    let theta = rule.dist.nodes();
    let weights = rule.dist.weights();
    let m = theta.len();
    let total = reference.total();
    let mut rows = Vec::with_capacity(m);
    for k in 1..m {
        rows.push(bounded_row(
            k,
            reference.measure_closed(theta[k - 1], theta[k]),
            weights[k - 1] + weights[k],
            f64::INFINITY,
            total,
            tol,
        ));
    }
    let outside = reference.alpha(theta[0]) + (total - reference.alpha_left(theta[m - 1]));
    rows.push(bounded_row(m, outside, weights[0] + weights[m - 1], f64::INFINITY, total, tol));
    Ok(CmsReport { kind: CmsReportKind::ComplexUpper { s }, gamma: None, rows, shifted_rows: Vec::new() })
}

// ---------------------------------------------------------------------------
// Piecewise bound tables
// ---------------------------------------------------------------------------

/// Which slice of the spectrum a piecewise row covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundFamily {
    /// From the first node up to `θ_k`.
    Prefix,
    /// Between two interior nodes.
    Interior,
    /// From `θ_j` through the upper end of the spectrum.
    Tail,
}

impl BoundFamily {
    /// Stable lowercase tag used in serialized output.
    pub fn label(&self) -> &'static str {
        match self {
            BoundFamily::Prefix => "prefix",
            BoundFamily::Interior => "interior",
            BoundFamily::Tail => "tail",
        }
    }
}

/// A computable two-sided estimate `lower ≤ μ(set) ≤ upper` of the
/// reference mass of `set`, built from accumulated rule weights alone.
#[derive(Clone, Debug)]
pub struct PiecewiseRow {
    pub family: BoundFamily,
    pub j: usize,
    pub k: usize,
    pub set: MeasureQuery,
    pub lower: f64,
    pub upper: f64,
}

/// The interval estimates a polynomial rule yields without any reference
/// computation.
#[derive(Clone, Debug)]
pub struct PiecewiseBounds {
    pub rows: Vec<PiecewiseRow>,
}

impl PiecewiseBounds {
    /// JSON array of rows; sets serialize as interval notation strings.
    pub fn to_json(&self) -> Value {
        json!({
            "rows": self
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "family": row.family.label(),
                        "j": row.j,
                        "k": row.k,
                        "set": row.set.to_string(),
                        "lower": row.lower,
                        "upper": row.upper,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    /// CSV with one line per row; the set column is quoted since interval
    /// notation contains commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,j,k,set,lower,upper\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},\"{}\",{},{}\n",
                row.family.label(),
                row.j,
                row.k,
                row.set,
                row.lower,
                row.upper
            ));
        }
        out
    }
}

/// Computable two-sided estimates of inter-node masses from a polynomial
/// rule, no reference required.  Interior rows bracket `μ((θ_j, θ_k])` by
/// the weights strictly inside and the weights spanning the bracket
/// (`Σ_{j+1..k−1}` below, `Σ_{j..k}` above; the lower bound is trivially
/// zero when `k = j + 1`).  Tail rows bracket the mass of `[θ_j, ∞)` the
/// same way.
///
/// # Errors
///
/// `WrongKind` unless the rule stems from a polynomial subspace.
pub fn cms_piecewise_polynomial(rule: &QuadratureRule) -> Result<PiecewiseBounds, CmsError> {
    match rule.kind {
        DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => {}
        kind => return Err(CmsError::WrongKind { kind }),
    }
    let theta = rule.dist.nodes();
    let m = theta.len();
    let prefix = prefix_sums(rule.dist.weights());
    let mut rows = Vec::new();
    for j in 1..m {
        for k in (j + 1)..=m {
            rows.push(PiecewiseRow {
                family: BoundFamily::Interior,
                j,
                k,
                set: MeasureQuery::interval(Interval::open_closed(theta[j - 1], theta[k - 1])),
                lower: prefix[k - 1] - prefix[j],
                upper: prefix[k] - prefix[j - 1],
            });
        }
    }
    for j in 2..=m {
        rows.push(PiecewiseRow {
            family: BoundFamily::Tail,
            j,
            k: m,
            set: MeasureQuery::interval(Interval::closed_open(theta[j - 1], f64::INFINITY)),
            lower: prefix[m] - prefix[j],
            upper: prefix[m] - prefix[j - 1],
        });
    }
    Ok(PiecewiseBounds { rows })
}

fn prefix_sums(weights: &[f64]) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        prefix.push(acc);
    }
    prefix
}

/// Whether a preassigned node pins down one end of the node range,
/// sharpening the piecewise sets on that side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundarySharpening {
    /// No preassigned boundary node.
    None,
    /// The first node is preassigned below the spectrum: nothing lies left
    /// of it, so prefix rows extend their inner set to `(−∞, θ_k]` and
    /// tail rows drop the `(−∞, θ_1)` piece from their outer set.
    PreassignedBelow,
    /// The last node is preassigned above the spectrum: prefix rows drop
    /// the `(θ_m, ∞)` piece from their outer set and tail rows extend
    /// their inner set to `[θ_j, ∞)`.
    PreassignedAbove,
}

/// One sandwich row: the accumulated weights `value` satisfy
/// `μ(inner) ≤ value ≤ μ(outer)` for the reference measure `μ`.
#[derive(Clone, Debug)]
pub struct SandwichRow {
    pub family: BoundFamily,
    pub j: usize,
    pub k: usize,
    pub inner: MeasureQuery,
    pub value: f64,
    pub outer: MeasureQuery,
}

/// The sandwich estimates of a real-pole rule whose pole lies inside the
/// node range.
#[derive(Clone, Debug)]
pub struct SandwichBounds {
    pub sharpening: BoundarySharpening,
    pub rows: Vec<SandwichRow>,
}

impl SandwichBounds {
    /// JSON object with the sharpening tag and all rows.
    pub fn to_json(&self) -> Value {
        let sharpening = match self.sharpening {
            BoundarySharpening::None => "none",
            BoundarySharpening::PreassignedBelow => "preassigned-below",
            BoundarySharpening::PreassignedAbove => "preassigned-above",
        };
        json!({
            "sharpening": sharpening,
            "rows": self
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "family": row.family.label(),
                        "j": row.j,
                        "k": row.k,
                        "inner": row.inner.to_string(),
                        "value": row.value,
                        "outer": row.outer.to_string(),
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    /// CSV with one line per row; set columns are quoted since interval
    /// notation contains commas.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,j,k,inner,value,outer\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},\"{}\",{},\"{}\"\n",
                row.family.label(),
                row.j,
                row.k,
                row.inner,
                row.value,
                row.outer
            ));
        }
        out
    }
}

/// Sandwich estimates for a real-pole rule with `θ_1 < s < θ_m`: three row
/// families pin accumulated weights between reference measures of an inner
/// and an outer set.  Prefix rows cover `[θ_1, θ_k]` against
/// `(−∞, θ_{k+1}) ∪ (θ_m, ∞)`; interior rows cover `[θ_j, θ_k]` against
/// `(θ_{j−1}, θ_{k+1})`; tail rows cover `[θ_j, θ_m]` against
/// `(−∞, θ_1) ∪ (θ_{j−1}, ∞)`.  Rules with a node preassigned at a
/// boundary get the sharpened sets described on [`BoundarySharpening`].
///
/// # Errors
///
/// `WrongKind`/`ComplexPole` for rules without a real pole;
/// `PoleOutsideNodes` when `s` does not lie strictly between the extreme
/// nodes (the polynomial-style table applies there instead).
pub fn cms_piecewise_rational(
    rule: &QuadratureRule,
    tol: &ToleranceProfile,
) -> Result<SandwichBounds, CmsError> {
    let s = real_pole(&rule.kind)?;
    let theta = rule.dist.nodes();
    let m = theta.len();
    if m < 2 || s <= theta[0] || s >= theta[m - 1] {
        return Err(CmsError::PoleOutsideNodes {
            s,
            lo: theta.first().copied().unwrap_or(f64::NAN),
            hi: theta.last().copied().unwrap_or(f64::NAN),
        });
    }
    let sharpening = match rule.kind {
        DecompositionKind::QorRational { xi, .. } => {
            let scale = (theta[m - 1] - theta[0]).max(1.0);
            if (xi - theta[0]).abs() <= tol.rule_distinct * scale {
                BoundarySharpening::PreassignedBelow
            } else if (xi - theta[m - 1]).abs() <= tol.rule_distinct * scale {
                BoundarySharpening::PreassignedAbove
            } else {
                BoundarySharpening::None
            }
        }
        _ => BoundarySharpening::None,
    };
    let prefix = prefix_sums(rule.dist.weights());
    const INF: f64 = f64::INFINITY;
    let mut rows = Vec::new();
    for k in 1..m {
        let inner = if sharpening == BoundarySharpening::PreassignedBelow {
            Interval::open_closed(-INF, theta[k - 1])
        } else {
            Interval::closed(theta[0], theta[k - 1])
        };
        let mut outer = vec![Interval::open(-INF, theta[k])];
        if sharpening != BoundarySharpening::PreassignedAbove {
            outer.push(Interval::open(theta[m - 1], INF));
        }
        rows.push(SandwichRow {
            family: BoundFamily::Prefix,
            j: 1,
            k,
            inner: MeasureQuery::interval(inner),
            value: prefix[k],
            outer: MeasureQuery::from_intervals(outer),
        });
    }
    for j in 2..m {
        for k in (j + 1)..m {
            rows.push(SandwichRow {
                family: BoundFamily::Interior,
                j,
                k,
                inner: MeasureQuery::interval(Interval::closed(theta[j - 1], theta[k - 1])),
                value: prefix[k] - prefix[j - 1],
                outer: MeasureQuery::interval(Interval::open(theta[j - 2], theta[k])),
            });
        }
    }
    for j in 2..=m {
        let inner = if sharpening == BoundarySharpening::PreassignedAbove {
            Interval::closed_open(theta[j - 1], INF)
        } else {
            Interval::closed(theta[j - 1], theta[m - 1])
        };
        let mut outer = vec![Interval::open(theta[j - 2], INF)];
        if sharpening != BoundarySharpening::PreassignedBelow {
            outer.push(Interval::open(-INF, theta[0]));
        }
        rows.push(SandwichRow {
            family: BoundFamily::Tail,
            j,
            k: m,
            inner: MeasureQuery::interval(inner),
            value: prefix[m] - prefix[j - 1],
            outer: MeasureQuery::from_intervals(outer),
        });
    }
    Ok(SandwichBounds { sharpening, rows })
}

// ---------------------------------------------------------------------------
// F diagnostic
// ---------------------------------------------------------------------------

/// The difference `F = α_n − α_m` (shifted by its value at the pole when
/// one is given) sampled at a node and at its left limit.
#[derive(Clone, Copy, Debug)]
pub struct FSample {
    pub k: usize,
    pub theta: f64,
    /// `F(θ_k)`.
    pub at: f64,
    /// `F(θ_k−)`.
    pub left: f64,
}

/// The sign-alternation record for one index: the bound pattern expects
/// `F` negative at `θ_k` and positive at the left limit of the next node
/// (cyclically wrapping to `θ_1` in the shifted form).
#[derive(Clone, Copy, Debug)]
pub struct FAlternation {
    pub k: usize,
    pub negative_at_node: bool,
    pub positive_at_next_left: bool,
}

/// Samples of the separation defect `F` and its sign pattern.
#[derive(Clone, Debug)]
pub struct FDiagnostic {
    /// The pole the samples were shifted at, if any.
    pub shift: Option<f64>,
    /// The subtracted constant `F(s)` (zero for the unshifted form).
    pub offset: f64,
    pub samples: Vec<FSample>,
    pub alternations: Vec<FAlternation>,
}

impl FDiagnostic {
    /// JSON object with the shift, offset, samples, and alternation flags.
    pub fn to_json(&self) -> Value {
        json!({
            "shift": self.shift,
            "offset": self.offset,
            "samples": self
                .samples
                .iter()
                .map(|s| json!({ "k": s.k, "theta": s.theta, "at": s.at, "left": s.left }))
                .collect::<Vec<_>>(),
            "alternations": self
                .alternations
                .iter()
                .map(|a| {
                    json!({
                        "k": a.k,
                        "negative_at_node": a.negative_at_node,
                        "positive_at_next_left": a.positive_at_next_left,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    /// CSV of the samples, one line per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,theta,value_at_node,value_left_limit\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", s.k, s.theta, s.at, s.left));
        }
        out
    }
}

/// Samples `F = α_n − α_m` at every rule node and its left limit, and
/// records where the expected sign alternation (negative at the node,
/// positive at the next left limit) holds.  With a pole `s` given the
/// samples are of `F − F(s)` instead, the alternation wraps cyclically
/// from the last node to the first, and the subtracted constant is
/// reported as `offset`.
pub fn f_diagnostic(
    reference: &StepDistribution,
    rule: &QuadratureRule,
    shift: Option<f64>,
) -> FDiagnostic {
    let dist = &rule.dist;
    let offset = shift.map_or(0.0, |s| reference.alpha(s) - dist.alpha(s));
    let theta = dist.nodes();
    let m = theta.len();
    let samples: Vec<FSample> = theta
        .iter()
        .enumerate()
        .map(|(i, &t)| FSample {
            k: i + 1,
            theta: t,
            at: reference.alpha(t) - dist.alpha(t) - offset,
            left: reference.alpha_left(t) - dist.alpha_left(t) - offset,
        })
        .collect();
    let mut alternations = Vec::new();
    for k in 1..m {
        alternations.push(FAlternation {
            k,
            negative_at_node: samples[k - 1].at < 0.0,
            positive_at_next_left: samples[k].left > 0.0,
        });
    }
    if shift.is_some() && m > 0 {
        alternations.push(FAlternation {
            k: m,
            negative_at_node: samples[m - 1].at < 0.0,
            positive_at_next_left: samples[0].left > 0.0,
        });
    }
    FDiagnostic { shift, offset, samples, alternations }
}

// ---------------------------------------------------------------------------
// Majorants: confluent Newton interpolation and the rational transplant
// ---------------------------------------------------------------------------

/// A value condition at a node, optionally with a slope condition.
#[derive(Clone, Copy, Debug)]
pub struct InterpolationCondition {
    pub node: f64,
    pub value: f64,
    pub slope: Option<f64>,
}

/// A polynomial in Newton form over a confluent node sequence: nodes with
/// a slope condition appear twice, and the corresponding divided
/// difference is the prescribed derivative.
#[derive(Clone, Debug)]
pub struct HermitePolynomial {
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl HermitePolynomial {
    /// Interpolates the given conditions (nodes strictly ascending) by the
    /// unique polynomial of degree `< #conditions + #slopes`.  The
    /// construction is verified by re-evaluating every condition; a defect
    /// beyond `majorant_check` (relative to the condition magnitudes)
    /// reports as a conditioning failure.
    ///
    /// # Errors
    ///
    /// `TooFewNodes`, `NodesNotAscending`, or `Conditioning`.
    pub fn fit(
        conditions: &[InterpolationCondition],
        tol: &ToleranceProfile,
    ) -> Result<Self, CmsError> {
        if conditions.is_empty() {
            return Err(CmsError::TooFewNodes { min: 1, got: 0 });
        }
        for i in 1..conditions.len() {
            if conditions[i].node <= conditions[i - 1].node {
                return Err(CmsError::NodesNotAscending {
                    index: i,
                    value: conditions[i].node,
                    previous: conditions[i - 1].node,
                });
            }
        }
        // Leja ordering of the condition blocks: ascending order piles the
        // node-distance products onto the last node and loses digits there,
        // while the greedy max-product order keeps them balanced.
        let mut order: Vec<usize> = Vec::with_capacity(conditions.len());
        let mut remaining: Vec<usize> = (0..conditions.len()).collect();
        while !remaining.is_empty() {
            let best = remaining
                .iter()
                .copied()
                .max_by(|&i, &j| {
                    let spread = |idx: usize| -> f64 {
                        if order.is_empty() {
                            conditions[idx].node.abs()
                        } else {
                            order
                                .iter()
                                .map(|&o| {
                                    (conditions[idx].node - conditions[o].node).abs().ln()
                                })
                                .sum()
                        }
                    };
                    spread(i).total_cmp(&spread(j))
                })
                .expect("remaining is non-empty");
            order.push(best);
            remaining.retain(|&i| i != best);
        }
        // Confluent sequence: duplicated nodes for slope conditions, with
        // the prescribed slope standing in for the first-order divided
        // difference between the duplicates.
        let mut z = Vec::new();
        let mut values = Vec::new();
        let mut link: Vec<Option<f64>> = Vec::new();
        for condition in order.iter().map(|&index| &conditions[index]) {
            if !z.is_empty() {
                link.push(None);
            }
            z.push(condition.node);
            values.push(condition.value);
            if let Some(slope) = condition.slope {
                link.push(Some(slope));
                z.push(condition.node);
                values.push(condition.value);
            }
        }
        let n = z.len();
        let mut coeffs = vec![values[0]];
        let mut prev = values;
        for level in 1..n {
            let mut cur = vec![0.0; n - level];
            for i in 0..n - level {
                cur[i] = if level == 1 {
                    match link[i] {
                        Some(slope) => slope,
                        None => (prev[i + 1] - prev[i]) / (z[i + 1] - z[i]),
                    }
                } else {
                    (prev[i + 1] - prev[i]) / (z[i + level] - z[i])
                };
            }
            coeffs.push(cur[0]);
            prev = cur;
        }
        let p = HermitePolynomial { nodes: z, coeffs };

        let value_scale = 1.0 + conditions.iter().fold(0.0f64, |a, c| a.max(c.value.abs()));
        let slope_scale =
            1.0 + conditions.iter().fold(0.0f64, |a, c| a.max(c.slope.unwrap_or(0.0).abs()));
        let mut defect = 0.0f64;
        for condition in conditions {
            let (value, slope) = p.evaluate_with_derivative(condition.node);
            defect = defect.max((value - condition.value).abs() / value_scale);
            if let Some(expected) = condition.slope {
                defect = defect.max((slope - expected).abs() / slope_scale);
            }
        }
        if !defect.is_finite() || defect > tol.majorant_check {
            return Err(CmsError::Conditioning { defect, tol: tol.majorant_check });
        }
        Ok(p)
    }

    /// Horner evaluation of the Newton form.
    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        let mut value = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            value = value * (x - self.nodes[i]) + self.coeffs[i];
        }
        value
    }

    /// Simultaneous value and first derivative.
    pub fn evaluate_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.coeffs.len();
        let mut value = self.coeffs[n - 1];
        let mut derivative = 0.0;
        for i in (0..n - 1).rev() {
            derivative = derivative * (x - self.nodes[i]) + value;
            value = value * (x - self.nodes[i]) + self.coeffs[i];
        }
        (value, derivative)
    }

    /// An upper bound on the degree (the number of coefficients minus one).
    pub fn degree_bound(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// The confluent node sequence of the Newton form.
    pub fn newton_nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// The divided-difference coefficients of the Newton form.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Which side of the step indicator a majorant certifies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MajorantSide {
    /// Dominates the indicator from above.
    Plus,
    /// Stays below the indicator.
    Minus,
}

impl MajorantSide {
    fn opposite(self) -> Self {
        match self {
            MajorantSide::Plus => MajorantSide::Minus,
            MajorantSide::Minus => MajorantSide::Plus,
        }
    }
}

/// The degree-`2m−2` polynomial that certifies one bound row over the
/// ascending `nodes`.
///
/// Both sides take the value 1 at the first `k` nodes and 0 at the rest.
/// The `Plus` polynomial has zero slope everywhere except at `θ_k`, which
/// makes it dominate the indicator of `(−∞, θ_k]`; the `Minus` polynomial
/// has zero slope everywhere except at `θ_{k+1}`, which keeps it below the
/// indicator of `(−∞, θ_{k+1})`.  Both inequalities are strict off the
/// nodes.  Construction re-checks the conditions and samples the
/// inequality on a thousand-point grid; failures report as conditioning
/// errors since the interpolation problem grows ill-conditioned quickly
/// (hence the node-count cap).
///
/// # Errors
///
/// `TooFewNodes`, `IndexOutOfRange`, `TooManyNodes`, `NodesNotAscending`,
/// or `Conditioning`.
pub fn majorant_polynomial(
    nodes: &[f64],
    k: usize,
    side: MajorantSide,
    tol: &ToleranceProfile,
) -> Result<HermitePolynomial, CmsError> {
    let m = nodes.len();
    if m < 2 {
        return Err(CmsError::TooFewNodes { min: 2, got: m });
    }
    if m > tol.majorant_m_cap {
        return Err(CmsError::TooManyNodes { m, cap: tol.majorant_m_cap });
    }
    if k < 1 || k >= m {
        return Err(CmsError::IndexOutOfRange { k, m });
    }
    let free_slope = match side {
        MajorantSide::Plus => k,
        MajorantSide::Minus => k + 1,
    };
    let conditions: Vec<InterpolationCondition> = (1..=m)
        .map(|j| InterpolationCondition {
            node: nodes[j - 1],
            value: if j <= k { 1.0 } else { 0.0 },
            slope: if j == free_slope { None } else { Some(0.0) },
        })
        .collect();
    let p = HermitePolynomial::fit(&conditions, tol)?;

    // Sample the indicator inequality across and slightly beyond the node
    // range; the threshold node separates the value-1 plateau from the
    // value-0 plateau.
    let spread = nodes[m - 1] - nodes[0];
    let lo = nodes[0] - 0.1 * spread;
    let hi = nodes[m - 1] + 0.1 * spread;
    let threshold = nodes[free_slope - 1];
    let mut defect = 0.0f64;
    let samples = 1000;
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let value = p.evaluate(x);
        let slack = tol.majorant_check * (1.0 + value.abs());
        let violation = match side {
            MajorantSide::Plus => {
                let bound = if x <= threshold { 1.0 } else { 0.0 };
                bound - value
            }
            MajorantSide::Minus => {
                let bound = if x < threshold { 1.0 } else { 0.0 };
                value - bound
            }
        };
        if violation > slack {
            defect = defect.max(violation);
        }
    }
    if defect > 0.0 {
        return Err(CmsError::Conditioning { defect, tol: tol.majorant_check });
    }
    Ok(p)
}

/// A rational certificate `r(λ) = 1 − p((λ − s)⁻¹)`: a confluent-Newton
/// polynomial evaluated in the transformed variable, together with the
/// pole of the transform.
#[derive(Clone, Debug)]
pub struct RationalMajorant {
    pole: f64,
    inner: HermitePolynomial,
}

impl RationalMajorant {
    /// The pole `s` of the transform.
    pub fn pole(&self) -> f64 {
        self.pole
    }

    /// The polynomial applied in the transformed variable.
    pub fn inner(&self) -> &HermitePolynomial {
        &self.inner
    }

    /// Evaluates the certificate at `λ ≠ s`; the value diverges as `λ`
    /// approaches the pole.
    pub fn evaluate(&self, lambda: f64) -> f64 {
        1.0 - self.inner.evaluate((lambda - self.pole).recip())
    }
}

/// The rational certificate for one cyclic bound row of a real-pole rule:
/// on the pole-split line, the `Plus` side dominates the indicator of
/// `R_k` and the `Minus` side stays below the indicator of the interior
/// of `R_{k+1}` (wrapping past `m` to `R_1`), both strictly off the nodes,
/// and both taking the value 1 exactly on the nodes indexed by `I_k` and
/// 0 on the rest.
///
/// The construction transplants [`majorant_polynomial`] through
/// `y = (λ − s)⁻¹`: the transformed nodes sorted ascending are interpolated
/// by the opposite-side polynomial at the mapped index, and the result is
/// flipped (`r = 1 − p∘transform`).  Node values are re-checked and the
/// indicator inequalities sampled on the clustered grid (points within the
/// cluster radius of the pole are skipped, as the certificate legitimately
/// diverges there).
///
/// # Errors
///
/// Everything [`majorant_polynomial`] reports, plus `PoleOnNode` and
/// `ExcludedIndex` for the wrap-around index, where no two-sided bound
/// exists.
pub fn rational_majorant(
    nodes: &[f64],
    s: f64,
    k: usize,
    side: MajorantSide,
    tol: &ToleranceProfile,
) -> Result<RationalMajorant, CmsError> {
    let m = nodes.len();
    if m < 2 {
        return Err(CmsError::TooFewNodes { min: 2, got: m });
    }
    if k < 1 || k > m {
        return Err(CmsError::IndexOutOfRange { k, m });
    }
    let geom = PoleGeometry::new(nodes, s, (f64::NEG_INFINITY, f64::INFINITY), tol)?;
    if k == geom.km() {
        return Err(CmsError::ExcludedIndex { k });
    }
    let xi = geom.transformed_nodes();
    let inner = majorant_polynomial(&xi, geom.iota(k) - 1, side.opposite(), tol)?;
    let r = RationalMajorant { pole: s, inner };

    // Node values: 1 exactly on the accumulated index set, 0 elsewhere.
    let in_set = |j: usize| geom.index_set(k).contains(&j);
    let mut defect = 0.0f64;
    for j in 1..=m {
        let expected = if in_set(j) { 1.0 } else { 0.0 };
        defect = defect.max((r.evaluate(nodes[j - 1]) - expected).abs());
    }
    if !defect.is_finite() || defect > tol.majorant_check {
        return Err(CmsError::Conditioning { defect, tol: tol.majorant_check });
    }

    // Indicator inequalities on the clustered grid, skipping the pole's
    // immediate vicinity.
    let lo0 = nodes[0].min(s);
    let hi0 = nodes[m - 1].max(s);
    let span = hi0 - lo0;
    let grid = sampling_grid(lo0 - 0.1 * span, hi0 + 0.1 * span, nodes, tol);
    let guard = tol.grid_cluster * 1.2 * span;
    let region = match side {
        MajorantSide::Plus => geom.region(k),
        MajorantSide::Minus => geom.region_open(k + 1),
    };
    let mut defect = 0.0f64;
    for &x in &grid {
        if (x - s).abs() <= guard {
            continue;
        }
        let value = r.evaluate(x);
        let slack = tol.majorant_check * (1.0 + value.abs());
        let inside = region.contains(x);
        let violation = match side {
            MajorantSide::Plus => (if inside { 1.0 } else { 0.0 }) - value,
            MajorantSide::Minus => value - (if inside { 1.0 } else { 0.0 }),
        };
        if !violation.is_finite() || violation > slack {
            defect = defect.max(violation);
        }
    }
    if defect > 0.0 || !defect.is_finite() {
        return Err(CmsError::Conditioning { defect, tol: tol.majorant_check });
    }
    Ok(r)
}

/// The deterministic grid used for sampling inequalities: uniformly spaced
/// points over `[lo, hi]` plus a cluster of points within
/// `grid_cluster · (hi − lo)` of each node (and the node itself), sorted
/// and deduplicated.
pub fn sampling_grid(lo: f64, hi: f64, nodes: &[f64], tol: &ToleranceProfile) -> Vec<f64> {
    let n = tol.grid_points.max(2);
    let mut points: Vec<f64> =
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let delta = tol.grid_cluster * (hi - lo);
    for &node in nodes {
        points.extend([node - delta, node - 0.5 * delta, node, node + 0.5 * delta, node + delta]);
    }
    points.retain(|x| x.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}
