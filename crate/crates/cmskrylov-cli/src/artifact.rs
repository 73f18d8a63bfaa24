//! Serializes a finished run: one `run.json` with every requested series
//! plus a CSV file per tabular output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use crate::config::ExperimentConfig;
use crate::pipeline::RunResult;

/// Assembles the `run.json` document. `timestamp_unix` is the only field
/// that varies between identically-configured runs.
pub fn run_json(cfg: &ExperimentConfig, result: &RunResult) -> Result<Value> {
    let checks: Vec<Value> = result
        .checks
        .iter()
        .map(|check| {
            json!({
                "name": check.name,
                "passed": check.passed,
                "detail": check.detail,
            })
        })
        .collect();
    let mut outputs = Map::new();
    for output in &result.outputs {
        outputs.insert(output.kind.label().to_string(), output.json.clone());
    }
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .context("system clock before the epoch")?
        .as_secs();
    Ok(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "config": cfg.to_json(),
        "matrix_note": result.matrix_note,
        "tolerances": serde_json::to_value(&cfg.tolerances)?,
        "checks": checks,
        "outputs": Value::Object(outputs),
    }))
}

/// Writes `run.json` and the CSV series into `out_dir`, creating it if
/// needed. Returns the written paths in a stable order.
pub fn write(out_dir: &Path, cfg: &ExperimentConfig, result: &RunResult) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut written = Vec::new();
    let json_path = out_dir.join("run.json");
    let document = run_json(cfg, result)?;
    let mut text = serde_json::to_string_pretty(&document)?;
    text.push('\n');
    fs::write(&json_path, text)
        .with_context(|| format!("writing {}", json_path.display()))?;
    written.push(json_path);
    for output in &result.outputs {
        if let Some(csv) = &output.csv {
            let path = out_dir.join(format!("{}.csv", output.kind.file_stem()));
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
    }
    Ok(written)
}
