//! Named initial-data presets.

use pks_core::grid::RadialGrid;
use pks_core::{CoreError, RadialDensity};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialData {
    /// `rho = M exp(-r^2/2 sigma^2) / (2 pi sigma^2)`
    Gaussian { sigma: f64 },
    /// The steady profile of scale `lambda` and ideal mass `M`, truncated at
    /// the grid boundary (the grid then carries `M R^2/(lambda + R^2)`; only
    /// this parameterization is an exact steady state of the truncated flow).
    Steady { lambda: f64 },
    /// Annular bump `rho ~ exp(-(r - r0)^2 / 2 sigma^2)`, normalized to M.
    Ring { r0: f64, sigma: f64 },
}

impl InitialData {
    pub fn build(&self, mass: f64, grid: &RadialGrid) -> Result<RadialDensity, CoreError> {
        match *self {
            InitialData::Gaussian { sigma } => RadialDensity::from_cumulative_fn(
                grid.clone(),
                |r| mass * (1.0 - (-r * r / (2.0 * sigma * sigma)).exp()),
            ),
            InitialData::Steady { lambda } => Ok(pks_core::density::make_steady_profile(
                lambda, mass, grid, 1.0,
            )?
            .density),
            InitialData::Ring { r0, sigma } => {
                let raw = RadialDensity::from_fn_cell_avg(grid.clone(), |r| {
                    (-(r - r0) * (r - r0) / (2.0 * sigma * sigma)).exp()
                })?;
                let scale = mass / raw.mass();
                let values: Vec<f64> = raw.values().iter().map(|v| v * scale).collect();
                RadialDensity::from_cell_values(grid.clone(), values)
            }
        }
    }
}
