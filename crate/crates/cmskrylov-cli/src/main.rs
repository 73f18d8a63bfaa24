//! Command-line front end: resolves a preset or an explicit configuration,
//! runs it, writes the artifacts, and reports the invariant checks.
//!
//! Exit codes: 0 when every check passes, 1 when the run completes but a
//! check fails, 2 on configuration, input, or numerical-construction
//! errors.

mod artifact;
mod config;
mod pipeline;
mod presets;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use cmskrylov::ToleranceProfile;

use config::{ExperimentConfig, Method, MetricSource, OutputKind, VectorSource};

#[derive(Parser)]
#[command(
    name = "cmskrylov",
    version,
    about = "Two-sided bounds on a spectral distribution from Krylov quadrature rules",
    after_help = "Artifacts land in --out: run.json plus one CSV per requested series.\n\
                  Run with --list-presets to see the canned experiments."
)]
struct Cli {
    /// Run a canned experiment by name.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// List the available presets and exit.
    #[arg(long)]
    list_presets: bool,

    /// Operator source: laplacian:N, diag:LIST (entries or A..B ranges), or
    /// a Matrix Market .mtx file.
    #[arg(long, value_name = "SRC", conflicts_with = "preset")]
    matrix: Option<String>,

    /// Inner-product source: identity (default) or a Matrix Market .mtx
    /// file with a Hermitian positive definite matrix.
    #[arg(long, value_name = "SRC", conflicts_with = "preset")]
    metric: Option<String>,

    /// Starting vector: random (default; see --seed), ones, or a text file
    /// with one `re [im]` pair per line.
    #[arg(long, value_name = "SRC", conflicts_with = "preset")]
    vector: Option<String>,

    /// Subspace construction: poly, qor-poly, sai-real, sai-complex,
    /// qor-sai, or extended.
    #[arg(long, value_name = "METHOD", conflicts_with = "preset")]
    method: Option<Method>,

    /// Subspace dimension (for extended this defaults to 2*rho - 1).
    #[arg(long, conflicts_with = "preset")]
    m: Option<usize>,

    /// Pole of the shifted methods, written RE or RE,IM.
    #[arg(long, value_name = "RE[,IM]", conflicts_with = "preset", allow_hyphen_values = true)]
    shift: Option<String>,

    /// Preassigned eigenvalue of the quasi-orthogonal-residual methods.
    #[arg(long, conflicts_with = "preset", allow_hyphen_values = true)]
    xi: Option<f64>,

    /// Number of inverse powers in the extended method.
    #[arg(long, conflicts_with = "preset")]
    rho: Option<usize>,

    /// Seed for the random starting vector; CMSKRYLOV_SEED is the fallback.
    #[arg(long)]
    seed: Option<u64>,

    /// Comma-separated outputs: bounds, f, fs, stepfuncs, rule,
    /// quadrature-check, piecewise, omega-sweep. Defaults depend on the
    /// method and on --no-reference.
    #[arg(long, value_name = "LIST", conflicts_with = "preset")]
    outputs: Option<String>,

    /// Skip the exact reference distribution; only rule-side outputs
    /// remain available.
    #[arg(long)]
    no_reference: bool,

    /// JSON file overriding tolerance settings; omitted fields keep their
    /// defaults.
    #[arg(long, value_name = "FILE")]
    tol_profile: Option<PathBuf>,

    /// Directory the run artifacts are written to.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var("CMSKRYLOV_SEED") {
        Ok(text) => {
            let seed = text
                .parse()
                .with_context(|| format!("CMSKRYLOV_SEED={text:?} is not a valid seed"))?;
            Ok(Some(seed))
        }
        Err(_) => Ok(None),
    }
}

/// Output sets chosen when --outputs is not given.
fn default_outputs(method: Method, no_reference: bool) -> Vec<OutputKind> {
    use OutputKind::*;
    if no_reference {
        match method {
            // The rational piecewise table needs the pole inside the node
            // range, so shifted methods only get it on request.
            Method::Poly | Method::QorPoly => vec![Rule, Piecewise],
            _ => vec![Rule],
        }
    } else {
        match method {
            Method::Poly | Method::QorPoly | Method::Extended => vec![Bounds, F, Rule],
            Method::SaiReal | Method::QorSai => vec![Bounds, F, Fs, Rule],
            Method::SaiComplex => vec![Bounds, Rule],
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.preset {
        Some(name) => presets::resolve(name)?,
        None => {
            let method = cli
                .method
                .ok_or_else(|| anyhow::anyhow!("either --preset or --method is required"))?;
            let rho = cli.rho;
            let m = match (cli.m, method, rho) {
                (Some(m), _, _) => m,
                (None, Method::Extended, Some(rho)) if rho >= 1 => 2 * rho - 1,
                _ => bail!("--m is required"),
            };
            let matrix = cli
                .matrix
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--matrix is required"))?
                .parse()?;
            let metric = match cli.metric.as_deref() {
                Some(spec) => spec.parse()?,
                None => MetricSource::Identity,
            };
            let vector = match cli.vector.as_deref() {
                Some(spec) => spec.parse()?,
                None => VectorSource::Random,
            };
            let shift = cli.shift.as_deref().map(config::parse_shift).transpose()?;
            let outputs = match cli.outputs.as_deref() {
                Some(list) => list
                    .split(',')
                    .map(|token| token.trim().parse())
                    .collect::<Result<Vec<_>>>()?,
                None => default_outputs(method, cli.no_reference),
            };
            ExperimentConfig {
                preset: None,
                matrix,
                metric,
                vector,
                method,
                m,
                shift,
                xi: cli.xi,
                rho,
                seed: None,
                outputs,
                no_reference: cli.no_reference,
                tolerances: ToleranceProfile::default(),
            }
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    } else if cfg.seed.is_none() {
        cfg.seed = env_seed()?;
    }
    if cli.no_reference {
        cfg.no_reference = true;
    }
    if let Some(path) = &cli.tol_profile {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading tolerance profile {}", path.display()))?;
        cfg.tolerances = serde_json::from_str(&text)
            .with_context(|| format!("parsing tolerance profile {}", path.display()))?;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    // Downstream consumers may close the pipe early (e.g. `| head`), which
    // is not an error worth dying over.
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    if cli.list_presets {
        let width = presets::PRESETS
            .iter()
            .map(|p| p.name.len())
            .max()
            .unwrap_or(0);
        for preset in presets::PRESETS {
            let _ = writeln!(out, "{:width$}  {}", preset.name, preset.description);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = resolve_config(cli)?;
    cfg.validate()?;
    let out_dir = cli
        .out
        .as_deref()
        .ok_or_else(|| anyhow::anyhow!("--out is required"))?;

    let result = pipeline::run_experiment(&cfg)?;
    let written = artifact::write(out_dir, &cfg, &result)?;

    for check in &result.checks {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "[{verdict}] {}: {}", check.name, check.detail);
    }
    for path in &written {
        let _ = writeln!(out, "wrote {}", path.display());
    }
    Ok(if result.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
