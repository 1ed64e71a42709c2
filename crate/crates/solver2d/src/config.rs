//! Solver configuration.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub r_max: f64,
    /// Ratio of outermost to innermost cell width (>= 1).
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_grading() -> f64 {
    400.0
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: 2048, r_max: 40.0, grading: default_grading() }
    }
}

/// Attraction kernel: the exact Newtonian field, or the globally regular
/// variant `-log(|x| + eps) / 2pi` whose velocity stays bounded near
/// concentrations (global continuation mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelMode {
    Exact,
    Regularized { eps: f64 },
}

impl Default for KernelMode {
    fn default() -> Self {
        KernelMode::Exact
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub grid: GridConfig,
    /// Drift CFL factor: dt <= cfl * min(h_i / |C_i|).
    pub cfl: f64,
    /// Verdict threshold: refusing to step below this flags imminent blowup.
    pub dt_min: f64,
    pub dt_max: f64,
    pub t_end: f64,
    /// Diagnostic sampling interval.
    pub cadence: f64,
    pub kernel: KernelMode,
    /// Verdict threshold on the maximal cell density.
    pub rho_max_ceiling: f64,
    /// Reference scale for the relative-entropy diagnostic.
    pub lambda_ref: f64,
    /// Keep full density snapshots at every cadence point.
    pub store_states: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: GridConfig::default(),
            cfl: 0.4,
            dt_min: 1e-13,
            dt_max: 1e-3,
            t_end: 1.0,
            cadence: 0.01,
            kernel: KernelMode::Exact,
            rho_max_ceiling: 1e9,
            lambda_ref: 1.0,
            store_states: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.dt_min < self.dt_max) {
            return Err(crate::SolverError::InvalidConfig("need dt_min < dt_max".into()));
        }
        if let KernelMode::Regularized { eps } = self.kernel {
            if !(eps >= 0.0) {
                return Err(crate::SolverError::InvalidConfig("eps must be >= 0".into()));
            }
        }
        if !(self.rho_max_ceiling > 0.0 && self.cadence > 0.0 && self.cfl > 0.0) {
            return Err(crate::SolverError::InvalidConfig(
                "thresholds, cadence and cfl must be positive".into(),
            ));
        }
        Ok(())
    }
}
