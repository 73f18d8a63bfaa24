//! Canned experiment configurations reproducing the library's headline
//! figures at a reproducible seed.

use anyhow::{bail, Result};
use cmskrylov::ToleranceProfile;
use num_complex::Complex64;

use crate::config::{ExperimentConfig, Method, OutputKind};

/// Seed used by every preset so that repeated runs are byte-identical.
pub const PRESET_SEED: u64 = 41;

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

/// The preset catalogue in display order.
pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig-stepfcts",
        description: "distribution staircases: exact vs. 10-node Gaussian rule on the 1200-point Laplacian (overlay with fig-F-sai-outside/stepfuncs.csv for the shifted rule)",
    },
    Preset {
        name: "fig-omega-sweep",
        description: "last representation entry omega_m(xi) on diag(1..50) with the ones vector, m = 5: flat at the unconstrained Ritz value, poles at the predecessor's eigenvalues",
    },
    Preset {
        name: "fig-F-poly",
        description: "polynomial separation bounds and the defect F at the nodes, Laplacian n = 1200, m = 10",
    },
    Preset {
        name: "fig-F-sai-outside",
        description: "shift-and-invert with s = -100 below the spectrum: bounds, F, F_s, and staircases",
    },
    Preset {
        name: "fig-F-sai-inside",
        description: "shift-and-invert with s = 10^4 inside the spectrum: cyclic bounds and F_s",
    },
    Preset {
        name: "fig-F-qor-sai",
        description: "rational quasi-orthogonal residual rule with preassigned node xi = -10 and pole s = 10^4",
    },
    Preset {
        name: "fig-complex-sai",
        description: "complex shift s = 10^4 - 100i: one-sided interval bounds from the isometric Arnoldi rule",
    },
    Preset {
        name: "fig-extended",
        description: "extended (Laurent) subspace with rho = 6 and pole s = -10: two-sided bounds and F",
    },
];

fn laplacian_run(method: Method, outputs: Vec<OutputKind>) -> ExperimentConfig {
    ExperimentConfig {
        preset: None,
        matrix: "laplacian:1200".parse().expect("preset matrix spec"),
        metric: "identity".parse().expect("preset metric spec"),
        vector: "random".parse().expect("preset vector spec"),
        method,
        m: 10,
        shift: None,
        xi: None,
        rho: None,
        seed: Some(PRESET_SEED),
        outputs,
        no_reference: false,
        tolerances: ToleranceProfile::default(),
    }
}

/// Resolves a preset name to its configuration.
pub fn resolve(name: &str) -> Result<ExperimentConfig> {
    use OutputKind::*;
    let mut cfg = match name {
        "fig-stepfcts" => laplacian_run(Method::Poly, vec![StepFuncs, Rule]),
        "fig-omega-sweep" => {
            let mut cfg = laplacian_run(Method::QorPoly, vec![OmegaSweep]);
            cfg.matrix = "diag:1..50".parse().expect("preset matrix spec");
            cfg.vector = "ones".parse().expect("preset vector spec");
            cfg.m = 5;
            cfg
        }
        "fig-F-poly" => laplacian_run(Method::Poly, vec![Bounds, F, Rule]),
        "fig-F-sai-outside" => {
            let mut cfg = laplacian_run(Method::SaiReal, vec![Bounds, F, Fs, StepFuncs, Rule]);
            cfg.shift = Some(Complex64::new(-100.0, 0.0));
            cfg
        }
        "fig-F-sai-inside" => {
            let mut cfg = laplacian_run(Method::SaiReal, vec![Bounds, Fs, Rule]);
            cfg.shift = Some(Complex64::new(1e4, 0.0));
            cfg
        }
        "fig-F-qor-sai" => {
            let mut cfg = laplacian_run(Method::QorSai, vec![Bounds, Fs, Rule]);
            cfg.shift = Some(Complex64::new(1e4, 0.0));
            cfg.xi = Some(-10.0);
            cfg
        }
        "fig-complex-sai" => {
            let mut cfg = laplacian_run(Method::SaiComplex, vec![Bounds, Rule]);
            cfg.shift = Some(Complex64::new(1e4, -100.0));
            cfg
        }
        "fig-extended" => {
            let mut cfg = laplacian_run(Method::Extended, vec![Bounds, F, Rule]);
            cfg.shift = Some(Complex64::new(-10.0, 0.0));
            cfg.rho = Some(6);
            cfg.m = 11;
            cfg
        }
        other => bail!(
            "unknown preset {other:?}; run with --list-presets to see what is available"
        ),
    };
    cfg.preset = Some(name.to_string());
    Ok(cfg)
}
