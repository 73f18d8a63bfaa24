//! Runs a configured experiment end to end: operator and starting vector,
//! subspace construction, quadrature rule, requested outputs, and the
//! invariant checks that decide the exit status.

use std::fs;

use anyhow::{bail, Context, Result};
use cmskrylov::krylov::{extended_lanczos, lanczos, sai_complex, sai_real};
use cmskrylov::linalg::read_matrix_market;
use cmskrylov::quadrature::{check_polynomial_exactness, check_rational_exactness};
use cmskrylov::{
    cms_complex_upper, cms_extended, cms_piecewise_polynomial, cms_piecewise_rational,
    cms_polynomial, cms_rational_real, exact_reference, f_diagnostic, laplacian_1d, measure,
    qor_poly, qor_rational_sai, random_unit_vector, rule_from_decomposition, CVector, CmsReport,
    DecompositionKind, ExactnessClass, HermitianOperator, InnerProduct, KrylovDecomposition,
    KrylovError, PoleGeometry, QuadratureRule, StepDistribution, ToleranceProfile,
};
use cmskrylov::linalg::OperatorData;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, MatrixSource, Method, MetricSource, OutputKind, VectorSource};

/// Rows may sit on their bound up to this fraction of the total mass
/// before a check reports a violation; converged Ritz values produce
/// honest zero-margin rows at rounding level.
const BOUND_SLACK_REL: f64 = 1e-10;

/// Relative tolerance of the mass identity `Σ|c_j|² = α_n(b)`.
const MASS_SLACK_REL: f64 = 1e-10;

/// Relative padding of the sweep grid beyond the Gershgorin interval.
const SWEEP_PAD_REL: f64 = 0.02;

/// One pass/fail invariant derived from the requested outputs.
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// One emitted data series: its JSON block and, for tabular series, a CSV
/// rendering.
pub struct OutputArtifact {
    pub kind: OutputKind,
    pub json: Value,
    pub csv: Option<String>,
}

/// Everything a run produces before serialization.
pub struct RunResult {
    pub matrix_note: Option<String>,
    pub outputs: Vec<OutputArtifact>,
    pub checks: Vec<Check>,
}

impl RunResult {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|check| check.passed)
    }
}

fn build_operator(cfg: &ExperimentConfig) -> Result<(HermitianOperator, Option<String>)> {
    let tol = &cfg.tolerances;
    let note = |n: usize| {
        Some(format!(
            "three-point discretization of -d²/dx² on (0,1) with {n} interior \
             points; entries are scaled by 1/h² for h = 1/{}",
            n + 1
        ))
    };
    let op = match (&cfg.matrix, &cfg.metric) {
        (MatrixSource::Laplacian { n }, MetricSource::Identity) => {
            return Ok((laplacian_1d(*n)?, note(*n)));
        }
        (MatrixSource::Diagonal { entries }, MetricSource::Identity) => {
            HermitianOperator::diagonal(entries.clone())
        }
        (MatrixSource::MatrixMarket { path }, MetricSource::Identity) => {
            HermitianOperator::from_matrix_market(path, tol)
                .with_context(|| format!("loading operator from {}", path.display()))?
        }
        (source, MetricSource::MatrixMarket { path }) => {
            let metric = read_matrix_market(path)
                .with_context(|| format!("loading metric from {}", path.display()))?;
            let ip = InnerProduct::dense(metric, tol).context("building the metric")?;
            let a = match source {
                MatrixSource::Laplacian { n } => laplacian_1d(*n)?.to_dense(),
                MatrixSource::Diagonal { entries } => {
                    HermitianOperator::diagonal(entries.clone()).to_dense()
                }
                MatrixSource::MatrixMarket { path } => read_matrix_market(path)
                    .with_context(|| format!("loading operator from {}", path.display()))?,
            };
            let op = HermitianOperator::from_matrix(a, ip, tol)
                .context("the operator is not self-adjoint under the given metric")?;
            let note = match source {
                MatrixSource::Laplacian { n } => note(*n),
                _ => None,
            };
            return Ok((op, note));
        }
    };
    Ok((op, None))
}

fn parse_vector_file(path: &std::path::Path, n: usize) -> Result<CVector> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading vector file {}", path.display()))?;
    let mut u = CVector::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let re: f64 = parts
            .next()
            .unwrap()
            .parse()
            .with_context(|| format!("{}:{}: bad entry", path.display(), lineno + 1))?;
        let im: f64 = match parts.next() {
            Some(im) => im
                .parse()
                .with_context(|| format!("{}:{}: bad entry", path.display(), lineno + 1))?,
            None => 0.0,
        };
        if parts.next().is_some() {
            bail!("{}:{}: expected one or two numbers", path.display(), lineno + 1);
        }
        u.push(Complex64::new(re, im));
    }
    if u.len() != n {
        bail!(
            "vector file {} has {} entries but the operator has dimension {n}",
            path.display(),
            u.len()
        );
    }
    Ok(u)
}

fn build_vector(cfg: &ExperimentConfig, op: &HermitianOperator) -> Result<CVector> {
    match &cfg.vector {
        VectorSource::Random => {
            let seed = cfg.seed.expect("validated: random vector has a seed");
            Ok(random_unit_vector(op.dim(), seed, op.inner_product()))
        }
        VectorSource::Ones => Ok(vec![Complex64::new(1.0, 0.0); op.dim()]),
        VectorSource::File { path } => parse_vector_file(path, op.dim()),
    }
}

fn build_decomposition(
    cfg: &ExperimentConfig,
    op: &HermitianOperator,
    u: &CVector,
) -> Result<KrylovDecomposition> {
    let tol = &cfg.tolerances;
    let dec = match cfg.method {
        Method::Poly => lanczos(op, u, cfg.m, tol)?,
        Method::QorPoly => qor_poly(op, u, cfg.m, cfg.xi.expect("validated"), tol)?,
        Method::SaiReal => sai_real(op, u, cfg.m, cfg.real_shift(), tol)?,
        Method::SaiComplex => sai_complex(op, u, cfg.m, cfg.shift.expect("validated"), tol)?,
        Method::QorSai => qor_rational_sai(
            op,
            u,
            cfg.m,
            Complex64::new(cfg.real_shift(), 0.0),
            cfg.xi.expect("validated"),
            tol,
        )?,
        Method::Extended => {
            extended_lanczos(op, u, cfg.rho.expect("validated"), cfg.real_shift(), tol)?
        }
    };
    Ok(dec)
}

fn exactness_json(class: &ExactnessClass) -> Value {
    match *class {
        ExactnessClass::Polynomial { degree } => json!({
            "class": "polynomial",
            "degree": degree,
        }),
        ExactnessClass::RationalReal { s, denominator_power, numerator_degree } => json!({
            "class": "rational-real",
            "s": s,
            "denominator_power": denominator_power,
            "numerator_degree": numerator_degree,
        }),
        ExactnessClass::RationalComplex { s, denominator_power, numerator_degree } => json!({
            "class": "rational-complex",
            "s": { "re": s.re, "im": s.im },
            "denominator_power": denominator_power,
            "numerator_degree": numerator_degree,
        }),
        ExactnessClass::Laurent { s, denominator_power, numerator_degree } => json!({
            "class": "laurent",
            "s": s,
            "denominator_power": denominator_power,
            "numerator_degree": numerator_degree,
        }),
    }
}

fn rule_output(rule: &QuadratureRule, method: Method) -> OutputArtifact {
    let (a, b) = rule.dist.support();
    let json = json!({
        "method": method.label(),
        "exactness": exactness_json(&rule.exactness),
        "support": [a, b],
        "nodes": rule.dist.nodes(),
        "weights": rule.dist.weights(),
    });
    let mut csv = String::from("j,node,weight\n");
    for (j, (node, weight)) in rule.dist.nodes().iter().zip(rule.dist.weights()).enumerate() {
        csv.push_str(&format!("{},{},{}\n", j + 1, node, weight));
    }
    OutputArtifact { kind: OutputKind::Rule, json, csv: Some(csv) }
}

fn bounds_report(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<CmsReport> {
    let report = match rule.kind {
        DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => {
            cms_polynomial(rule, reference, tol)?
        }
        DecompositionKind::SaIReal { .. } | DecompositionKind::QorRational { .. } => {
            cms_rational_real(rule, reference, tol)?
        }
        DecompositionKind::SaIComplex { .. } => cms_complex_upper(rule, reference, tol)?,
        DecompositionKind::Extended { .. } => cms_extended(rule, reference, tol)?,
    };
    Ok(report)
}

fn bounds_check(report: &CmsReport, total: f64) -> Check {
    let slack = BOUND_SLACK_REL * total;
    let rows = report.rows.iter().chain(&report.shifted_rows);
    let mut count = 0usize;
    let mut min_margin = f64::INFINITY;
    for row in rows {
        count += 1;
        min_margin = min_margin.min(row.margin);
    }
    Check {
        name: "bounds-hold",
        passed: min_margin >= -slack,
        detail: format!(
            "minimum margin {min_margin:.3e} across {count} rows (slack {slack:.1e})"
        ),
    }
}

/// The real pole of a shifted rule, if it has one.
fn real_pole(kind: &DecompositionKind) -> Option<f64> {
    match *kind {
        DecompositionKind::SaIReal { s } => Some(s),
        DecompositionKind::QorRational { s, .. } if s.im == 0.0 => Some(s.re),
        _ => None,
    }
}

/// The preassigned eigenvalue of a quasi-orthogonal-residual rule, if any.
fn preassigned(kind: &DecompositionKind) -> Option<f64> {
    match *kind {
        DecompositionKind::QorPoly { xi } => Some(xi),
        DecompositionKind::QorRational { xi, .. } => Some(xi),
        _ => None,
    }
}

/// Indices (1-based) of nodes exempt from strict-sign checks: the
/// preassigned node, which may sit at an equality by construction, and for
/// the shifted diagnostic the wrap-around index `k_m`.
fn exempt_nodes(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    shifted: bool,
    tol: &ToleranceProfile,
) -> Result<Vec<usize>> {
    let nodes = rule.dist.nodes();
    let mut exempt = Vec::new();
    if let Some(xi) = preassigned(&rule.kind) {
        let nearest = nodes
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - xi).abs().partial_cmp(&(b.1 - xi).abs()).expect("finite nodes")
            })
            .map(|(i, _)| i + 1)
            .expect("rules are nonempty");
        exempt.push(nearest);
    }
    if shifted {
        let s = real_pole(&rule.kind).expect("shifted diagnostics need a real pole");
        let geometry = PoleGeometry::new(nodes, s, reference.support(), tol)?;
        if !exempt.contains(&geometry.km()) {
            exempt.push(geometry.km());
        }
    }
    exempt.sort_unstable();
    Ok(exempt)
}

/// Verifies the down-crossing pattern `F(θ_k) ≤ 0 ≤ F(θ_k⁻)` at every
/// non-exempt node, up to a rounding slack: nodes whose weight has fully
/// converged to the adjacent spectral mass sit on the equality edge at
/// machine precision.
fn alternation_check(
    name: &'static str,
    diag: &cmskrylov::FDiagnostic,
    exempt: &[usize],
    total: f64,
) -> Check {
    let slack = BOUND_SLACK_REL * total;
    let mut failures = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for sample in &diag.samples {
        if exempt.contains(&sample.k) {
            continue;
        }
        worst = worst.max(sample.at).max(-sample.left);
        if sample.at > slack || sample.left < -slack {
            failures.push(sample.k);
        }
    }
    let checked = diag.samples.len() - exempt.len();
    let detail = if failures.is_empty() {
        let exempt_note = if exempt.is_empty() {
            String::new()
        } else {
            format!(" (exempt: {exempt:?})")
        };
        format!(
            "sign change at all {checked} nodes, worst violation {worst:.3e} \
             (slack {slack:.1e}){exempt_note}"
        )
    } else {
        format!("sign violations beyond {slack:.1e} at nodes {failures:?}")
    };
    Check { name, passed: failures.is_empty(), detail }
}

fn quadrature_check_output(
    rule: &QuadratureRule,
    reference: &StepDistribution,
    tol: &ToleranceProfile,
) -> Result<(OutputArtifact, Check)> {
    let max_degree = rule.exactness.numerator_degree();
    let defects = match rule.exactness {
        ExactnessClass::Polynomial { .. } => {
            check_polynomial_exactness(rule, reference, max_degree)
        }
        ExactnessClass::RationalReal { s, .. } | ExactnessClass::Laurent { s, .. } => {
            check_rational_exactness(rule, reference, Complex64::new(s, 0.0), max_degree, tol)?
        }
        ExactnessClass::RationalComplex { s, .. } => {
            check_rational_exactness(rule, reference, s, max_degree, tol)?
        }
    };
    let pass: Vec<bool> = defects.iter().map(|&d| d <= tol.exactness_pass).collect();
    let mut csv = String::from("degree,defect,pass\n");
    for (d, (defect, ok)) in defects.iter().zip(&pass).enumerate() {
        csv.push_str(&format!("{d},{defect},{ok}\n"));
    }
    let json = json!({
        "exactness": exactness_json(&rule.exactness),
        "max_degree": max_degree,
        "defects": defects,
        "pass": pass,
    });
    let worst = defects.iter().cloned().fold(0.0f64, f64::max);
    let check = Check {
        name: "exactness",
        passed: pass.iter().all(|&ok| ok),
        detail: format!(
            "worst relative moment defect {worst:.3e} through degree {max_degree} \
             (tolerance {:.1e})",
            tol.exactness_pass
        ),
    };
    Ok((OutputArtifact { kind: OutputKind::QuadratureCheck, json, csv: Some(csv) }, check))
}

fn staircase(dist: &StepDistribution, support: (f64, f64)) -> Vec<(f64, f64)> {
    let mut points = vec![(support.0, 0.0)];
    for &x in dist.nodes() {
        points.push((x, dist.alpha_left(x)));
        points.push((x, dist.alpha(x)));
    }
    points.push((support.1, dist.total()));
    points
}

fn stepfuncs_output(rule: &QuadratureRule, reference: &StepDistribution) -> OutputArtifact {
    let (a, b) = reference.support();
    let support = (a.min(rule.dist.support().0), b.max(rule.dist.support().1));
    let series = [
        ("reference", staircase(reference, support)),
        ("rule", staircase(&rule.dist, support)),
    ];
    let mut csv = String::from("series,x,alpha\n");
    for (name, points) in &series {
        for (x, alpha) in points {
            csv.push_str(&format!("{name},{x},{alpha}\n"));
        }
    }
    let json = json!({
        "series": series
            .iter()
            .map(|(name, points)| {
                json!({
                    "name": name,
                    "points": points.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
                })
            })
            .collect::<Vec<_>>(),
    });
    OutputArtifact { kind: OutputKind::StepFuncs, json, csv: Some(csv) }
}

fn piecewise_output(
    rule: &QuadratureRule,
    reference: Option<&StepDistribution>,
    tol: &ToleranceProfile,
) -> Result<(OutputArtifact, Option<Check>)> {
    match rule.kind {
        DecompositionKind::Polynomial | DecompositionKind::QorPoly { .. } => {
            let bounds = cms_piecewise_polynomial(rule)?;
            let check = reference.map(|reference| {
                let slack = BOUND_SLACK_REL * reference.total();
                let mut failures = Vec::new();
                for row in &bounds.rows {
                    let mass = measure(reference, &row.set);
                    if mass < row.lower - slack || mass > row.upper + slack {
                        failures.push((row.family.label(), row.j, row.k));
                    }
                }
                Check {
                    name: "piecewise-brackets",
                    passed: failures.is_empty(),
                    detail: if failures.is_empty() {
                        format!("all {} interval estimates bracket the true mass", bounds.rows.len())
                    } else {
                        format!("estimates missing the true mass: {failures:?}")
                    },
                }
            });
            let artifact = OutputArtifact {
                kind: OutputKind::Piecewise,
                json: bounds.to_json(),
                csv: Some(bounds.to_csv()),
            };
            Ok((artifact, check))
        }
        DecompositionKind::SaIReal { .. } | DecompositionKind::QorRational { .. } => {
            let bounds = cms_piecewise_rational(rule, tol)?;
            let check = reference.map(|reference| {
                let slack = BOUND_SLACK_REL * reference.total();
                let mut failures = Vec::new();
                for row in &bounds.rows {
                    let inner = measure(reference, &row.inner);
                    let outer = measure(reference, &row.outer);
                    if row.value < inner - slack || row.value > outer + slack {
                        failures.push((row.family.label(), row.j, row.k));
                    }
                }
                Check {
                    name: "piecewise-brackets",
                    passed: failures.is_empty(),
                    detail: if failures.is_empty() {
                        format!("all {} sandwich rows hold", bounds.rows.len())
                    } else {
                        format!("sandwich rows out of order: {failures:?}")
                    },
                }
            });
            let artifact = OutputArtifact {
                kind: OutputKind::Piecewise,
                json: bounds.to_json(),
                csv: Some(bounds.to_csv()),
            };
            Ok((artifact, check))
        }
        kind => bail!("piecewise output is not defined for {kind:?}"),
    }
}

/// Gershgorin enclosure of the spectrum, used to pick the sweep range.
fn spectral_interval(op: &HermitianOperator) -> (f64, f64) {
    match op.data() {
        OperatorData::Tridiagonal { diag, offdiag } => {
            let n = diag.len();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                let mut radius = 0.0;
                if i > 0 {
                    radius += offdiag[i - 1].abs();
                }
                if i + 1 < n {
                    radius += offdiag[i].abs();
                }
                lo = lo.min(diag[i] - radius);
                hi = hi.max(diag[i] + radius);
            }
            (lo, hi)
        }
        OperatorData::Dense(a) => {
            let n = a.nrows();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                let center = a[(i, i)].re;
                let radius: f64 =
                    (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
                lo = lo.min(center - radius);
                hi = hi.max(center + radius);
            }
            (lo, hi)
        }
    }
}

/// Sweeps the preassigned eigenvalue over a grid and records the last
/// representation entry `ω_m(ξ)`, together with its fixed points (the
/// unconstrained Ritz values, where `ω_m = a_m`) and its poles (the
/// predecessor's Ritz values).
fn omega_sweep_run(
    cfg: &ExperimentConfig,
    op: &HermitianOperator,
    u: &CVector,
    matrix_note: Option<String>,
) -> Result<RunResult> {
    let tol = &cfg.tolerances;
    let m = cfg.m;
    let full = lanczos(op, u, m, tol)?;
    let a_m = full.rep[(m - 1, m - 1)].re;
    let ritz = rule_from_decomposition(&full, tol)?;
    let predecessor = lanczos(op, u, m - 1, tol)?;
    let poles = rule_from_decomposition(&predecessor, tol)?;

    let omega_at = |xi: f64| -> Result<Option<f64>> {
        match qor_poly(op, u, m, xi, tol) {
            Ok(dec) => Ok(Some(dec.rep[(m - 1, m - 1)].re)),
            Err(KrylovError::GuardViolation { .. }) => Ok(None),
            Err(err) => Err(err.into()),
        }
    };

    let (lo, hi) = spectral_interval(op);
    let pad = SWEEP_PAD_REL * (hi - lo).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    let points = tol.grid_points.max(2);
    let mut csv = String::from("series,xi,omega\n");
    for i in 0..points {
        let xi = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        match omega_at(xi)? {
            Some(omega) => csv.push_str(&format!("sweep,{xi},{omega}\n")),
            None => csv.push_str(&format!("sweep,{xi},\n")),
        }
    }

    let scale = a_m.abs().max(1.0);
    let mut ritz_rows = Vec::new();
    let mut worst = 0.0f64;
    for &theta in ritz.dist.nodes() {
        let omega = omega_at(theta)?;
        if let Some(omega) = omega {
            worst = worst.max((omega - a_m).abs());
            csv.push_str(&format!("ritz,{theta},{omega}\n"));
        } else {
            csv.push_str(&format!("ritz,{theta},\n"));
        }
        ritz_rows.push(json!({ "xi": theta, "omega": omega }));
    }
    let fixed_point_tol = 1e-8 * scale;
    let fixed_points = Check {
        name: "omega-at-ritz",
        passed: ritz_rows.len() == m
            && ritz.dist.nodes().len() == m
            && worst <= fixed_point_tol
            && ritz_rows.iter().all(|row| !row["omega"].is_null()),
        detail: format!(
            "max |ω_m(θ_j) − a_m| = {worst:.3e} over {} Ritz values (tolerance {fixed_point_tol:.1e})",
            ritz_rows.len()
        ),
    };

    let mut pole_hits = 0usize;
    for &pole in poles.dist.nodes() {
        if omega_at(pole)?.is_none() {
            pole_hits += 1;
        }
        csv.push_str(&format!("pole,{pole},\n"));
    }
    let pole_check = Check {
        name: "omega-poles",
        passed: pole_hits == m - 1,
        detail: format!(
            "{pole_hits} of {} predecessor Ritz values rejected by the proximity guard",
            m - 1
        ),
    };

    let json = json!({
        "m": m,
        "a_m": a_m,
        "grid": { "points": points, "range": [lo, hi] },
        "ritz": ritz_rows,
        "poles": poles.dist.nodes(),
    });
    Ok(RunResult {
        matrix_note,
        outputs: vec![OutputArtifact { kind: OutputKind::OmegaSweep, json, csv: Some(csv) }],
        checks: vec![fixed_points, pole_check],
    })
}

/// Runs the experiment described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    let tol = &cfg.tolerances;
    let (op, matrix_note) = build_operator(cfg)?;
    let u = build_vector(cfg, &op)?;

    if cfg.sweeps() {
        return omega_sweep_run(cfg, &op, &u, matrix_note);
    }

    let reference = if cfg.no_reference {
        None
    } else {
        Some(exact_reference(&op, &u, tol).context("computing the reference distribution")?)
    };
    let dec = build_decomposition(cfg, &op, &u)?;
    let rule = rule_from_decomposition(&dec, tol)?;

    let mut outputs = Vec::new();
    let mut checks = Vec::new();

    if let Some(reference) = &reference {
        let total = reference.total();
        let defect = (rule.dist.total() - total).abs();
        checks.push(Check {
            name: "rule-mass",
            passed: defect <= MASS_SLACK_REL * total,
            detail: format!(
                "|Σ w_j − α_n(b)| = {defect:.3e} of total {total:.6e} \
                 (tolerance {MASS_SLACK_REL:.1e} relative)"
            ),
        });
    }

    for &kind in &cfg.outputs {
        match kind {
            OutputKind::Rule => outputs.push(rule_output(&rule, cfg.method)),
            OutputKind::Bounds => {
                let reference = reference.as_ref().expect("validated");
                let report = bounds_report(&rule, reference, tol)?;
                checks.push(bounds_check(&report, reference.total()));
                outputs.push(OutputArtifact {
                    kind,
                    json: report.to_json(),
                    csv: Some(report.to_csv()),
                });
            }
            OutputKind::F => {
                let reference = reference.as_ref().expect("validated");
                let diag = f_diagnostic(reference, &rule, None);
                if matches!(
                    rule.kind,
                    DecompositionKind::Polynomial
                        | DecompositionKind::QorPoly { .. }
                        | DecompositionKind::Extended { .. }
                ) {
                    let exempt = exempt_nodes(&rule, reference, false, tol)?;
                    checks.push(alternation_check(
                        "f-alternations",
                        &diag,
                        &exempt,
                        reference.total(),
                    ));
                }
                outputs.push(OutputArtifact {
                    kind,
                    json: diag.to_json(),
                    csv: Some(diag.to_csv()),
                });
            }
            OutputKind::Fs => {
                let reference = reference.as_ref().expect("validated");
                let s = real_pole(&rule.kind).expect("validated: fs needs a real pole");
                let diag = f_diagnostic(reference, &rule, Some(s));
                let exempt = exempt_nodes(&rule, reference, true, tol)?;
                checks.push(alternation_check(
                    "fs-alternations",
                    &diag,
                    &exempt,
                    reference.total(),
                ));
                outputs.push(OutputArtifact {
                    kind,
                    json: diag.to_json(),
                    csv: Some(diag.to_csv()),
                });
            }
            OutputKind::StepFuncs => {
                let reference = reference.as_ref().expect("validated");
                outputs.push(stepfuncs_output(&rule, reference));
            }
            OutputKind::QuadratureCheck => {
                let reference = reference.as_ref().expect("validated");
                let (artifact, check) = quadrature_check_output(&rule, reference, tol)?;
                checks.push(check);
                outputs.push(artifact);
            }
            OutputKind::Piecewise => {
                let (artifact, check) = piecewise_output(&rule, reference.as_ref(), tol)?;
                checks.extend(check);
                outputs.push(artifact);
            }
            OutputKind::OmegaSweep => unreachable!("sweep runs take the dedicated path"),
        }
    }

    Ok(RunResult { matrix_note, outputs, checks })
}
