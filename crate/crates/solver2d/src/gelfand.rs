//! Stationary profile of the rescaled flow: the unique radial solution of
//!
//! ```text
//! u = M exp(v - |x|^2/2) / int exp(v - |x|^2/2),   v = G * u ,
//! ```
//!
//! computed by a damped fixed-point iteration on the normalized map. The
//! additive gauge of `v` cancels in the normalization.

use crate::{Result, SolverError};
use pks_core::grid::RadialGrid;
use pks_core::potential::chemoattractant_field;
use pks_core::RadialDensity;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct GelfandSolution {
    pub u_inf: RadialDensity,
    /// Potential `v` at the grid nodes.
    pub v_inf: Vec<f64>,
    /// L1 gap `|u - Phi(u)|` of the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

/// Apply the normalized fixed-point map to `u`.
fn apply_map(u: &RadialDensity, mass: f64) -> (RadialDensity, Vec<f64>) {
    let field = chemoattractant_field(u);
    let grid = u.grid();
    let n = grid.n_cells();
    // Boltzmann weight at cell midpoints; v interpolated between nodes.
    let mut weight = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        let r = grid.cell_mid(i);
        let v_mid = 0.5 * (field.value[i] + field.value[i + 1]);
        let w = (v_mid - 0.5 * r * r).exp();
        weight[i] = w;
        z += w * grid.weights()[i];
    }
    let values: Vec<f64> = weight.iter().map(|w| mass * w / z).collect();
    let next = RadialDensity::from_cell_values(grid.clone(), values)
        .expect("Boltzmann weights are nonnegative");
    (next, field.value)
}

/// Damped fixed-point iteration `u <- (1-omega) u + omega Phi(u)` until the
/// successive L1 gap falls below `tol`.
pub fn solve_gelfand(
    mass: f64,
    grid: &RadialGrid,
    tol: f64,
    max_iter: usize,
    omega: f64,
) -> Result<GelfandSolution> {
    if !(mass > 0.0 && mass < 8.0 * PI) {
        return Err(SolverError::InvalidConfig(
            "the stationary rescaled profile needs 0 < M < 8 pi".into(),
        ));
    }
    // start from the Gaussian that solves the small-mass limit
    let mut u = RadialDensity::from_cumulative_fn(grid.clone(), |r| {
        mass * (1.0 - (-r * r / 2.0).exp())
    })?;
    let mut history = Vec::new();
    for it in 0..max_iter {
        let (phi_u, v) = apply_map(&u, mass);
        let gap: f64 = u
            .values()
            .iter()
            .zip(phi_u.values())
            .zip(u.grid().weights())
            .map(|((a, b), w)| (a - b).abs() * w)
            .sum();
        history.push(gap);
        if gap < tol {
            return Ok(GelfandSolution {
                u_inf: phi_u,
                v_inf: v,
                residual: gap,
                iterations: it + 1,
                residual_history: history,
            });
        }
        let values: Vec<f64> = u
            .values()
            .iter()
            .zip(phi_u.values())
            .map(|(a, b)| (1.0 - omega) * a + omega * b)
            .collect();
        u = RadialDensity::from_cell_values(grid.clone(), values)?;
    }
    Err(SolverError::NoConvergence {
        residual: *history.last().unwrap_or(&f64::NAN),
        iters: history.len(),
    })
}
