//! Trajectory diagnostics: the second-moment growth law, the explicit
//! supercritical existence-time bound, and the collapse-profile zoom.

use crate::solver::Trajectory;
use crate::{Result, SolverError};
use pks_core::numerics::linear_fit;
use pks_core::RadialDensity;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Least-squares slope of the second moment against the prediction
/// `4 M (1 - M / 8 pi)`.
///
/// When the prediction vanishes (critical mass) the relative error is
/// measured against the natural scale `4 M`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VirialFit {
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    pub relative_error: f64,
}

pub fn virial_diagnostic(traj: &Trajectory) -> Result<VirialFit> {
    let cutoff = traj
        .verdict
        .map(|v| v.t_estimate * 0.9)
        .unwrap_or(f64::INFINITY);
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.t <= cutoff)
        .map(|s| (s.t, s.second_moment))
        .collect();
    if pts.len() < 10 {
        return Err(SolverError::Diagnostic(format!(
            "virial fit needs >= 10 pre-blowup samples, got {}",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (fitted_slope, _) = linear_fit(&xs, &ys);
    let mass = traj.mass;
    let predicted_slope = 4.0 * mass * (1.0 - mass / (8.0 * PI));
    let denom = if predicted_slope.abs() > 1e-12 { predicted_slope.abs() } else { 4.0 * mass };
    Ok(VirialFit {
        fitted_slope,
        predicted_slope,
        relative_error: (fitted_slope - predicted_slope).abs() / denom,
    })
}

/// Existence-time bound `2 pi int |x|^2 rho_0 / (M (M - 8 pi))`; absent for
/// subcritical or critical mass or when the second moment diverges.
pub fn blowup_upper_bound(rho0: &RadialDensity) -> Option<f64> {
    let mom = rho0.moments_and_entropy();
    let mass = mom.mass;
    if mass <= 8.0 * PI {
        return None;
    }
    let v0 = mom.second_moment.finite()?;
    Some(2.0 * PI * v0 / (mass * (mass - 8.0 * PI)))
}

/// Comparison of late-time states against the collapse comparator
/// `8 / (1 + y^2)^2` after the rescaling `y = r / L`, `L = sqrt(8 / rho(0))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZoomReport {
    /// (t, L, relative L1 distance on y <= 5) per analysed frame.
    pub frames: Vec<(f64, f64, f64)>,
    /// Extrapolated collapse time from 1/rho_max -> 0.
    pub t_star: f64,
    /// Fitted exponent of L against (T - t).
    pub exponent: Option<f64>,
    /// True when the grid resolves the core (first cell < L / 4).
    pub resolved: bool,
    /// Distances decrease monotonically over the analysed frames.
    pub monotone_approach: bool,
}

/// Rescaled-profile comparison on the last `n_frames` stored states.
pub fn blowup_zoom(traj: &Trajectory, n_frames: usize) -> Result<ZoomReport> {
    if traj.verdict.is_none() {
        return Err(SolverError::Diagnostic("zoom needs a detected blowup".into()));
    }
    if traj.states.len() < n_frames.max(3) {
        return Err(SolverError::Diagnostic(format!(
            "zoom needs >= {} stored states, got {}",
            n_frames.max(3),
            traj.states.len()
        )));
    }
    let frames_in: Vec<&(f64, RadialDensity)> =
        traj.states.iter().rev().take(n_frames).rev().collect();

    // collapse time: linear extrapolation of x = 1/rho_max to zero over the
    // last stored frames (median of pairwise estimates)
    let mut t_candidates = Vec::new();
    let tail: Vec<(f64, f64)> = traj
        .states
        .iter()
        .rev()
        .take(n_frames + 3)
        .map(|(t, rho)| (*t, 1.0 / rho.max_value()))
        .collect();
    for w in tail.windows(2) {
        let (t1, x1) = w[1]; // earlier
        let (t0, x0) = w[0]; // later
        if x1 > x0 && t0 > t1 {
            t_candidates.push(t0 + x0 * (t0 - t1) / (x1 - x0));
        }
    }
    if t_candidates.is_empty() {
        return Err(SolverError::Diagnostic("rho_max is not increasing near the end".into()));
    }
    t_candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let t_star = t_candidates[t_candidates.len() / 2];

    let mut frames = Vec::new();
    let mut resolved = true;
    for (t, rho) in frames_in {
        let rho0 = rho.values()[0];
        let l = (8.0 / rho0).sqrt();
        let first_cell = rho.grid().nodes()[1];
        if first_cell > l / 4.0 {
            resolved = false;
        }
        // relative L1 distance on {y <= 5} between L^2 rho(L y) and the comparator
        let n_y = 512;
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..n_y {
            let y = (k as f64 + 0.5) * 5.0 / n_y as f64;
            let comparator = 8.0 / (1.0 + y * y).powi(2);
            let rescaled = l * l * rho.at(l * y);
            let weight = 2.0 * PI * y * (5.0 / n_y as f64);
            num += (rescaled - comparator).abs() * weight;
            den += comparator * weight;
        }
        frames.push((*t, l, num / den));
    }

    // power-law fit of L against (T - t)
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, l, _) in &frames {
        if *t < t_star && t_star - t > 1e-12 {
            xs.push((t_star - t).ln());
            ys.push(l.ln());
        }
    }
    let exponent = if xs.len() >= 3 { Some(linear_fit(&xs, &ys).0) } else { None };

    let monotone_approach = frames.windows(2).all(|w| w[1].2 <= w[0].2 * 1.02);
    Ok(ZoomReport { frames, t_star, exponent, resolved, monotone_approach })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{GridConfig, SolverConfig};
    use crate::presets::InitialData;
    use crate::solver::{run, BlowupVerdict, VerdictCriterion};
    use pks_core::grid::RadialGrid;

    #[test]
    fn upper_bound_matches_the_formula_and_hypotheses() {
        let g = RadialGrid::graded(2, 512, 30.0, 200.0).unwrap();
        let m16 = 16.0 * PI;
        let rho = InitialData::Gaussian { sigma: 1.0 }.build(m16, &g).unwrap();
        let v0 = rho.moments_and_entropy().second_moment.finite().unwrap();
        let bound = blowup_upper_bound(&rho).unwrap();
        assert!((bound - v0 / (64.0 * PI)).abs() < 1e-12 * bound);
        // hypotheses fail at and below the critical mass
        let rho = InitialData::Gaussian { sigma: 1.0 }.build(4.0 * PI, &g).unwrap();
        assert!(blowup_upper_bound(&rho).is_none());
        let rho = InitialData::Gaussian { sigma: 1.0 }.build(8.0 * PI, &g).unwrap();
        assert!(blowup_upper_bound(&rho).is_none());
    }

    #[test]
    fn virial_slopes_match_for_sub_and_critical_mass() {
        for (factor, tol) in [(0.5, 0.01), (1.0, 0.01)] {
            let mass = factor * 8.0 * PI;
            let grid = RadialGrid::graded(2, 2048, 40.0, 1000.0).unwrap();
            let rho0 = InitialData::Gaussian { sigma: 1.0 }.build(mass, &grid).unwrap();
            let cfg = SolverConfig {
                grid: GridConfig { n: 2048, r_max: 40.0, grading: 1000.0 },
                t_end: 1.0,
                cadence: 0.02,
                store_states: false,
                ..SolverConfig::default()
            };
            let traj = run(&rho0, &cfg).unwrap();
            let fit = virial_diagnostic(&traj).unwrap();
            assert!(
                fit.relative_error < tol,
                "mass factor {factor}: fitted {} vs predicted {} (rel {})",
                fit.fitted_slope,
                fit.predicted_slope,
                fit.relative_error
            );
        }
    }

    #[test]
    fn zoom_comparator_self_test_yields_zero_distance() {
        // synthetic exact sequence rho_k = L_k^{-2} 8/(1 + (r/L_k)^2)^2
        let grid = RadialGrid::graded(2, 2048, 10.0, 4000.0).unwrap();
        let schedule: Vec<f64> = (0..8).map(|k| 0.2 * (0.6f64).powi(k)).collect();
        let t_star_true = 1.0;
        let mut states = Vec::new();
        let mut samples = Vec::new();
        for (k, l) in schedule.iter().enumerate() {
            // L = sqrt(2 (T - t)) schedule: t = T - L^2 / 2
            let t = t_star_true - l * l / 2.0;
            let rho = RadialDensity::from_cumulative_fn(grid.clone(), |r| {
                let y2 = (r / l) * (r / l);
                8.0 * PI * y2 / (1.0 + y2)
            })
            .unwrap();
            states.push((t, rho));
            let _ = k;
        }
        for (t, rho) in &states {
            samples.push(crate::solver::TrajectorySample {
                t: *t,
                mass: rho.mass(),
                second_moment: 0.0,
                entropy: 0.0,
                f_pks: 0.0,
                h_lambda: f64::NAN,
                dissipation: 0.0,
                rho_max: rho.max_value(),
                dt: 1e-4,
                projection_l1: 0.0,
                f_rescaled: None,
                l1_to_stationary: None,
                weighted_l2_to_stationary: None,
            });
        }
        let mass = states[0].1.mass();
        let traj = Trajectory {
            samples,
            states,
            verdict: Some(BlowupVerdict {
                detected: true,
                t_estimate: 0.999,
                criterion: VerdictCriterion::DtCollapse,
                rho_max: 1e9,
            }),
            mass,
        };
        let zoom = blowup_zoom(&traj, 5).unwrap();
        for (_, _, dist) in &zoom.frames {
            assert!(*dist < 2e-2, "comparator distance {dist}");
        }
        // the synthetic schedule has L ~ (T - t)^{1/2}
        let exp = zoom.exponent.unwrap();
        assert!((exp - 0.5).abs() < 0.05, "exponent {exp}");
        assert!((zoom.t_star - t_star_true).abs() < 0.05, "t_star {}", zoom.t_star);
    }
}
