//! Experiment configuration: input sources, method selection, requested
//! outputs, and the validation rules tying them together.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use cmskrylov::ToleranceProfile;
use num_complex::Complex64;
use serde_json::{json, Value};

/// Where the operator comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixSource {
    /// Finite-difference discretization of the negative 1D Laplace operator
    /// on `(0,1)` with Dirichlet boundary, `h = 1/(n+1)`.
    Laplacian { n: usize },
    /// Diagonal matrix with the given entries.
    Diagonal { entries: Vec<f64> },
    /// Matrix Market file.
    MatrixMarket { path: PathBuf },
}

impl FromStr for MatrixSource {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        if let Some(n) = spec.strip_prefix("laplacian:") {
            let n: usize = n
                .parse()
                .with_context(|| format!("invalid laplacian size {n:?}"))?;
            if n == 0 {
                bail!("laplacian size must be positive");
            }
            return Ok(MatrixSource::Laplacian { n });
        }
        if let Some(list) = spec.strip_prefix("diag:") {
            let mut entries = Vec::new();
            for token in list.split(',') {
                if let Some((lo, hi)) = token.split_once("..") {
                    let lo: i64 = lo
                        .parse()
                        .with_context(|| format!("invalid range start {lo:?}"))?;
                    let hi: i64 = hi
                        .parse()
                        .with_context(|| format!("invalid range end {hi:?}"))?;
                    if hi < lo {
                        bail!("empty diagonal range {token:?}");
                    }
                    entries.extend((lo..=hi).map(|k| k as f64));
                } else {
                    let value: f64 = token
                        .parse()
                        .with_context(|| format!("invalid diagonal entry {token:?}"))?;
                    entries.push(value);
                }
            }
            if entries.is_empty() {
                bail!("diagonal source has no entries");
            }
            return Ok(MatrixSource::Diagonal { entries });
        }
        if spec.ends_with(".mtx") {
            return Ok(MatrixSource::MatrixMarket { path: PathBuf::from(spec) });
        }
        bail!("unrecognized matrix source {spec:?}: expected laplacian:N, diag:LIST, or a .mtx path")
    }
}

impl fmt::Display for MatrixSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixSource::Laplacian { n } => write!(f, "laplacian:{n}"),
            MatrixSource::Diagonal { entries } => {
                write!(f, "diag:")?;
                for (i, entry) in entries.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{entry}")?;
                }
                Ok(())
            }
            MatrixSource::MatrixMarket { path } => write!(f, "{}", path.display()),
        }
    }
}

/// Which inner product orthogonality refers to.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricSource {
    Identity,
    MatrixMarket { path: PathBuf },
}

impl FromStr for MetricSource {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        if spec == "identity" {
            Ok(MetricSource::Identity)
        } else if spec.ends_with(".mtx") {
            Ok(MetricSource::MatrixMarket { path: PathBuf::from(spec) })
        } else {
            bail!("unrecognized metric source {spec:?}: expected identity or a .mtx path")
        }
    }
}

impl fmt::Display for MetricSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSource::Identity => write!(f, "identity"),
            MetricSource::MatrixMarket { path } => write!(f, "{}", path.display()),
        }
    }
}

/// Where the starting vector comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum VectorSource {
    /// Standard-normal complex entries from a seeded generator, normalized
    /// in the metric norm.
    Random,
    /// The unnormalized all-ones vector.
    Ones,
    /// Text file, one entry per line as `re` or `re im`; `#`/`%` lines are
    /// comments.
    File { path: PathBuf },
}

impl FromStr for VectorSource {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        match spec {
            "random" => Ok(VectorSource::Random),
            "ones" => Ok(VectorSource::Ones),
            path => Ok(VectorSource::File { path: PathBuf::from(path) }),
        }
    }
}

impl fmt::Display for VectorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorSource::Random => write!(f, "random"),
            VectorSource::Ones => write!(f, "ones"),
            VectorSource::File { path } => write!(f, "{}", path.display()),
        }
    }
}

/// The subspace construction driving the run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Poly,
    QorPoly,
    SaiReal,
    SaiComplex,
    QorSai,
    Extended,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Poly => "poly",
            Method::QorPoly => "qor-poly",
            Method::SaiReal => "sai-real",
            Method::SaiComplex => "sai-complex",
            Method::QorSai => "qor-sai",
            Method::Extended => "extended",
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        match spec {
            "poly" => Ok(Method::Poly),
            "qor-poly" => Ok(Method::QorPoly),
            "sai-real" => Ok(Method::SaiReal),
            "sai-complex" => Ok(Method::SaiComplex),
            "qor-sai" => Ok(Method::QorSai),
            "extended" => Ok(Method::Extended),
            other => bail!(
                "unknown method {other:?}: expected poly, qor-poly, sai-real, \
                 sai-complex, qor-sai, or extended"
            ),
        }
    }
}

/// One emitted data series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputKind {
    /// Separation-bound report against the exact reference.
    Bounds,
    /// The defect `F = α_n − α_m` sampled at the nodes.
    F,
    /// The pole-shifted defect `F_s = F − F(s)`.
    Fs,
    /// Staircase samples of the reference and rule distribution functions.
    StepFuncs,
    /// Quadrature nodes and weights.
    Rule,
    /// Moment-matching verification against the reference.
    QuadratureCheck,
    /// Reference-free mass estimates derived from the rule alone.
    Piecewise,
    /// The last representation entry `ω_m` swept over the preassigned
    /// eigenvalue `ξ`.
    OmegaSweep,
}

impl OutputKind {
    pub fn label(self) -> &'static str {
        match self {
            OutputKind::Bounds => "bounds",
            OutputKind::F => "f",
            OutputKind::Fs => "fs",
            OutputKind::StepFuncs => "stepfuncs",
            OutputKind::Rule => "rule",
            OutputKind::QuadratureCheck => "quadrature-check",
            OutputKind::Piecewise => "piecewise",
            OutputKind::OmegaSweep => "omega-sweep",
        }
    }

    /// Basename of the CSV series file.
    pub fn file_stem(self) -> &'static str {
        match self {
            OutputKind::Bounds => "bounds",
            OutputKind::F => "f",
            OutputKind::Fs => "fs",
            OutputKind::StepFuncs => "stepfuncs",
            OutputKind::Rule => "rule",
            OutputKind::QuadratureCheck => "quadrature_check",
            OutputKind::Piecewise => "piecewise",
            OutputKind::OmegaSweep => "omega_sweep",
        }
    }

    pub fn needs_reference(self) -> bool {
        matches!(
            self,
            OutputKind::Bounds
                | OutputKind::F
                | OutputKind::Fs
                | OutputKind::StepFuncs
                | OutputKind::QuadratureCheck
        )
    }
}

impl FromStr for OutputKind {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        match spec {
            "bounds" => Ok(OutputKind::Bounds),
            "f" => Ok(OutputKind::F),
            "fs" => Ok(OutputKind::Fs),
            "stepfuncs" => Ok(OutputKind::StepFuncs),
            "rule" => Ok(OutputKind::Rule),
            "quadrature-check" => Ok(OutputKind::QuadratureCheck),
            "piecewise" => Ok(OutputKind::Piecewise),
            "omega-sweep" => Ok(OutputKind::OmegaSweep),
            other => bail!(
                "unknown output {other:?}: expected bounds, f, fs, stepfuncs, rule, \
                 quadrature-check, piecewise, or omega-sweep"
            ),
        }
    }
}

/// Parses a shift given as `RE` or `RE,IM`.
pub fn parse_shift(spec: &str) -> Result<Complex64> {
    let (re, im) = match spec.split_once(',') {
        Some((re, im)) => (re, im),
        None => (spec, "0"),
    };
    let re: f64 = re
        .trim()
        .parse()
        .with_context(|| format!("invalid shift real part {re:?}"))?;
    let im: f64 = im
        .trim()
        .parse()
        .with_context(|| format!("invalid shift imaginary part {im:?}"))?;
    Ok(Complex64::new(re, im))
}

/// A fully resolved run description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub matrix: MatrixSource,
    pub metric: MetricSource,
    pub vector: VectorSource,
    pub method: Method,
    pub m: usize,
    pub shift: Option<Complex64>,
    pub xi: Option<f64>,
    pub rho: Option<usize>,
    pub seed: Option<u64>,
    pub outputs: Vec<OutputKind>,
    pub no_reference: bool,
    pub tolerances: ToleranceProfile,
}

impl ExperimentConfig {
    /// The shift as a real number; the caller has validated that the method
    /// takes a real pole.
    pub fn real_shift(&self) -> f64 {
        self.shift.map(|s| s.re).unwrap_or_default()
    }

    /// Checks method/parameter compatibility and output feasibility.
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            bail!("subspace dimension m must be at least 1");
        }
        let requires = |field: Option<()>, name: &str| {
            field.ok_or_else(|| anyhow!("method {} requires --{name}", self.method.label()))
        };
        let forbids = |absent: bool, name: &str| {
            if absent {
                Ok(())
            } else {
                Err(anyhow!("method {} does not take --{name}", self.method.label()))
            }
        };
        match self.method {
            Method::Poly => {
                forbids(self.shift.is_none(), "shift")?;
                forbids(self.xi.is_none(), "xi")?;
                forbids(self.rho.is_none(), "rho")?;
            }
            Method::QorPoly => {
                forbids(self.shift.is_none(), "shift")?;
                forbids(self.rho.is_none(), "rho")?;
                if !self.sweeps() {
                    requires(self.xi.map(|_| ()), "xi")?;
                }
            }
            Method::SaiReal => {
                requires(self.shift.map(|_| ()), "shift")?;
                forbids(self.xi.is_none(), "xi")?;
                forbids(self.rho.is_none(), "rho")?;
            }
            Method::SaiComplex => {
                requires(self.shift.map(|_| ()), "shift")?;
                forbids(self.xi.is_none(), "xi")?;
                forbids(self.rho.is_none(), "rho")?;
            }
            Method::QorSai => {
                requires(self.shift.map(|_| ()), "shift")?;
                requires(self.xi.map(|_| ()), "xi")?;
                forbids(self.rho.is_none(), "rho")?;
            }
            Method::Extended => {
                requires(self.shift.map(|_| ()), "shift")?;
                requires(self.rho.map(|_| ()), "rho")?;
                forbids(self.xi.is_none(), "xi")?;
                let rho = self.rho.unwrap_or(1);
                if self.m != 2 * rho - 1 {
                    bail!(
                        "the extended subspace with rho = {rho} has dimension m = {}; \
                         got m = {}",
                        2 * rho - 1,
                        self.m
                    );
                }
            }
        }
        if let Some(s) = self.shift {
            let complex_ok = self.method == Method::SaiComplex;
            if complex_ok && s.im == 0.0 {
                bail!("sai-complex requires a shift with nonzero imaginary part");
            }
            if !complex_ok && s.im != 0.0 {
                bail!("method {} takes a real shift", self.method.label());
            }
        }
        if self.outputs.is_empty() {
            bail!("no outputs requested");
        }
        let mut seen = Vec::new();
        for &output in &self.outputs {
            if seen.contains(&output) {
                bail!("output {} requested twice", output.label());
            }
            seen.push(output);
            if self.no_reference && output.needs_reference() {
                bail!(
                    "output {} needs the exact reference distribution; \
                     drop --no-reference or request rule/piecewise instead",
                    output.label()
                );
            }
        }
        if self.sweeps() {
            if self.outputs.len() > 1 {
                bail!("omega-sweep cannot be combined with other outputs");
            }
            if self.method != Method::QorPoly {
                bail!("omega-sweep requires the qor-poly method");
            }
            if self.xi.is_some() {
                bail!("omega-sweep chooses xi itself; drop --xi");
            }
            if self.m < 2 {
                bail!("omega-sweep needs m upwards of 2");
            }
        }
        if self.outputs.contains(&OutputKind::Fs)
            && !matches!(self.method, Method::SaiReal | Method::QorSai)
        {
            bail!("output fs is defined for real-pole methods only (sai-real, qor-sai)");
        }
        if self.outputs.contains(&OutputKind::Piecewise)
            && matches!(self.method, Method::SaiComplex | Method::Extended)
        {
            bail!("output piecewise is not available for {}", self.method.label());
        }
        if self.vector == VectorSource::Random && self.seed.is_none() {
            bail!("vector source random needs a seed (--seed or CMSKRYLOV_SEED)");
        }
        Ok(())
    }

    /// Whether this run is an ω_m sweep rather than a single decomposition.
    pub fn sweeps(&self) -> bool {
        self.outputs.contains(&OutputKind::OmegaSweep)
    }

    /// Configuration echo for the artifact header.
    pub fn to_json(&self) -> Value {
        let shift = match self.shift {
            None => Value::Null,
            Some(s) if s.im == 0.0 => json!(s.re),
            Some(s) => json!({ "re": s.re, "im": s.im }),
        };
        json!({
            "preset": self.preset,
            "matrix": self.matrix.to_string(),
            "metric": self.metric.to_string(),
            "vector": self.vector.to_string(),
            "method": self.method.label(),
            "m": self.m,
            "shift": shift,
            "xi": self.xi,
            "rho": self.rho,
            "seed": self.seed,
            "outputs": self.outputs.iter().map(|o| o.label()).collect::<Vec<_>>(),
            "no_reference": self.no_reference,
        })
    }
}
