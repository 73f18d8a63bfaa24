//! Central tolerance configuration.
//!
//! Every numerical threshold in the library is collected in one value so a
//! run can be tightened or relaxed coherently (e.g. from a CLI profile
//! file). Factors marked "relative" are multiplied by a problem-dependent
//! scale (a norm, a spectral spread, a total mass) at the point of use.

use serde::{Deserialize, Serialize};

/// All tunable tolerances with their default values.
///
/// Deserializes from JSON with per-field defaults, so a profile file only
/// needs to list the fields it overrides.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceProfile {
    /// Relative Hermitian-defect bound accepted when ingesting operators
    /// and metrics (`‖A − Aᴴ‖ ≤ hermitian_check·‖A‖`).
    pub hermitian_check: f64,
    /// Eigensolver convergence: off-diagonal mass below
    /// `eig_tol·‖H‖_F` counts as converged.
    pub eig_tol: f64,
    /// Eigensolver iteration cap, in sweeps per matrix order.
    pub eig_sweep_cap: usize,
    /// Relative residual accepted from shifted linear solves.
    pub solve_residual: f64,
    /// Lucky-breakdown threshold for Krylov builders, relative to an
    /// operator norm estimate.
    pub breakdown: f64,
    /// Minimum distance of a preassigned eigenvalue ξ from the predecessor
    /// representation's spectrum, relative to its spread.
    pub qor_guard: f64,
    /// Largest anti-Hermitian part tolerated before Hermitizing a
    /// computed Rayleigh quotient, relative to its norm.
    pub hermitize: f64,
    /// Eigenvalue merge distance in the exact reference distribution,
    /// relative to the spectral spread.
    pub degenerate_merge: f64,
    /// Weights below `weight_floor·‖u‖²` are dropped from distributions.
    pub weight_floor: f64,
    /// Minimum relative gap between representation eigenvalues before a
    /// quadrature rule is rejected as degenerate.
    pub rule_distinct: f64,
    /// Pass threshold for moment-matching checks (relative error).
    pub exactness_pass: f64,
    /// A separation-bound row counts as numerically strict when its margin
    /// exceeds `cms_strict·total`.
    pub cms_strict: f64,
    /// Accepted defect in majorant interpolation conditions.
    pub majorant_check: f64,
    /// Largest node count for which majorants are constructed (confluent
    /// Vandermonde conditioning grows exponentially).
    pub majorant_m_cap: usize,
    /// Base grid size for sampled inequality verification.
    pub grid_points: usize,
    /// Clustered sample points are placed within `grid_cluster·spread`
    /// of each node.
    pub grid_cluster: f64,
    /// Relative residual accepted for total-mass identities
    /// (Σ|c_j|² against the reference total).
    pub identity_residual: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            hermitian_check: 1e-12,
            eig_tol: 1e-14,
            eig_sweep_cap: 64,
            solve_residual: 1e-12,
            breakdown: 1e-12,
            qor_guard: 1e-8,
            hermitize: 1e-8,
            degenerate_merge: 1e-10,
            weight_floor: 1e-14,
            rule_distinct: 1e-12,
            exactness_pass: 1e-9,
            cms_strict: 1e-12,
            majorant_check: 1e-8,
            majorant_m_cap: 12,
            grid_points: 2048,
            grid_cluster: 1e-6,
            identity_residual: 1e-10,
        }
    }
}
