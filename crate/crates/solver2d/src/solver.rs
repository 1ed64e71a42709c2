//! Semi-implicit finite-volume integration of the cumulative-mass equation.

use crate::config::{KernelMode, SolverConfig};
use crate::gelfand::GelfandSolution;
use crate::{Result, SolverError};
use pks_core::density::TailChecked;
use pks_core::energy;
use pks_core::grid::RadialGrid;
use pks_core::numerics::{linear_fit, solve_tridiagonal};
use pks_core::RadialDensity;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Evolved state: time plus cumulative mass at the grid nodes.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    m: Vec<f64>,
    grid: RadialGrid,
}

impl SolverState {
    pub fn from_density(rho: &RadialDensity) -> Self {
        SolverState { t: 0.0, m: rho.cum_mass().to_vec(), grid: rho.grid().clone() }
    }

    pub fn density(&self) -> RadialDensity {
        let masses: Vec<f64> = self.m.windows(2).map(|w| w[1] - w[0]).collect();
        RadialDensity::from_cell_masses(self.grid.clone(), &masses)
            .expect("projected cumulative mass is monotone")
    }

    pub fn cum_mass(&self) -> &[f64] {
        &self.m
    }

    pub fn mass(&self) -> f64 {
        *self.m.last().unwrap()
    }

    pub fn rho_max(&self) -> f64 {
        let w = self.grid.weights();
        self.m
            .windows(2)
            .enumerate()
            .map(|(i, p)| (p[1] - p[0]) / w[i])
            .fold(0.0, f64::max)
    }
}

/// Which blowup sensor fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictCriterion {
    RhoMaxCeiling,
    DtCollapse,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BlowupVerdict {
    pub detected: bool,
    pub t_estimate: f64,
    pub criterion: VerdictCriterion,
    pub rho_max: f64,
}

/// One diagnostic sample along a run.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub mass: f64,
    pub second_moment: f64,
    pub entropy: f64,
    pub f_pks: f64,
    /// Relative entropy towards the `lambda_ref` steady profile; NaN when
    /// the tail check flags it divergent.
    pub h_lambda: f64,
    pub dissipation: f64,
    pub rho_max: f64,
    pub dt: f64,
    /// L1 mass moved by the monotone projection since the last sample
    /// (scheme consistency telemetry).
    pub projection_l1: f64,
    /// Rescaled runs: free energy with confinement.
    pub f_rescaled: Option<f64>,
    /// Rescaled runs: L1 distance to the stationary rescaled profile.
    pub l1_to_stationary: Option<f64>,
    /// Rescaled runs: weighted L2 distance `int (u - u_inf)^2 / u_inf`.
    pub weighted_l2_to_stationary: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Density snapshots (kept when `store_states`), one per sample plus
    /// extra frames whenever `rho_max` doubles (for the collapse zoom).
    pub states: Vec<(f64, RadialDensity)>,
    pub verdict: Option<BlowupVerdict>,
    pub mass: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&(f64, RadialDensity)> {
        self.states.last()
    }

    /// Largest total increase of F along the samples (0 for monotone decay).
    pub fn max_f_pks_increase(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut running_min = f64::INFINITY;
        for s in &self.samples {
            if s.f_pks > running_min {
                worst = worst.max(s.f_pks - running_min);
            }
            running_min = running_min.min(s.f_pks);
        }
        worst
    }
}

/// The semi-implicit stepper. Immutable once built; owns the grid stencils
/// and (for the regularized kernel) the precomputed angular kernel matrix.
pub struct Solver2d {
    pub config: SolverConfig,
    grid: RadialGrid,
    rescaled: bool,
    /// stencil rows (h-, h+, denominators) per interior node
    lower_l: Vec<f64>,
    diag_l: Vec<f64>,
    upper_l: Vec<f64>,
    d1_lower: Vec<f64>,
    d1_diag: Vec<f64>,
    d1_upper: Vec<f64>,
    /// min(h-, h+) per interior node for the CFL bound
    h_min: Vec<f64>,
    /// regularized-kernel matrix k(r_i, s_j), row-major (N-1) x N
    reg_kernel: Option<Vec<f64>>,
}

impl Solver2d {
    pub fn new(grid: RadialGrid, config: SolverConfig, rescaled: bool) -> Result<Self> {
        config.validate()?;
        let nodes = grid.nodes();
        let n = grid.n_cells();
        let mut lower_l = vec![0.0; n - 1];
        let mut diag_l = vec![0.0; n - 1];
        let mut upper_l = vec![0.0; n - 1];
        let mut d1_lower = vec![0.0; n - 1];
        let mut d1_diag = vec![0.0; n - 1];
        let mut d1_upper = vec![0.0; n - 1];
        let mut h_min = vec![0.0; n - 1];
        for i in 1..n {
            let hm = nodes[i] - nodes[i - 1];
            let hp = nodes[i + 1] - nodes[i];
            let denom = hm * hp * (hm + hp);
            let r = nodes[i];
            // second derivative weights
            let (a_m, a_0, a_p) =
                (2.0 * hp / denom, -2.0 * (hm + hp) / denom, 2.0 * hm / denom);
            // first derivative weights (central, non-uniform)
            let (b_m, b_0, b_p) =
                (-hp * hp / denom, (hp * hp - hm * hm) / denom, hm * hm / denom);
            let k = i - 1;
            lower_l[k] = a_m - b_m / r;
            diag_l[k] = a_0 - b_0 / r;
            upper_l[k] = a_p - b_p / r;
            d1_lower[k] = b_m;
            d1_diag[k] = b_0;
            d1_upper[k] = b_p;
            h_min[k] = hm.min(hp);
        }
        let reg_kernel = match config.kernel {
            KernelMode::Exact => None,
            KernelMode::Regularized { eps } => Some(build_regularized_kernel(&grid, eps)),
        };
        Ok(Solver2d {
            config,
            grid,
            rescaled,
            lower_l,
            diag_l,
            upper_l,
            d1_lower,
            d1_diag,
            d1_upper,
            h_min,
            reg_kernel,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Drift coefficient C_i = -c_r(r_i) (- r_i in rescaled variables) at
    /// the interior nodes.
    fn drift_coefficients(&self, m: &[f64]) -> Vec<f64> {
        let nodes = self.grid.nodes();
        let n = self.grid.n_cells();
        let mut c = vec![0.0; n - 1];
        match (&self.reg_kernel, self.config.kernel) {
            (None, _) => {
                for i in 1..n {
                    c[i - 1] = m[i] / (2.0 * PI * nodes[i]);
                }
            }
            (Some(kernel), _) => {
                let cell_mass: Vec<f64> = m.windows(2).map(|w| w[1] - w[0]).collect();
                for i in 1..n {
                    let row = &kernel[(i - 1) * n..i * n];
                    let mut acc = 0.0;
                    for (k, dm) in row.iter().zip(&cell_mass) {
                        acc += k * dm;
                    }
                    c[i - 1] = acc / (2.0 * PI);
                }
            }
        }
        // Rescaled variables add the confining drift +div(xu): particle
        // velocity grad(v) - x, so C = -c_r + r. (This is the sign under
        // which the stationary rescaled profile is in fact stationary and
        // the confined free energy dissipates.)
        if self.rescaled {
            for i in 1..n {
                c[i - 1] += nodes[i];
            }
        }
        c
    }

    /// One adaptive step. Fails with `DtUnderflow` when the drift CFL
    /// condition forces the step below `dt_min` (imminent blowup).
    pub fn step(&self, state: &SolverState, dt_cap: f64) -> Result<(SolverState, f64, f64)> {
        let n = self.grid.n_cells();
        let total = state.mass();
        let c = self.drift_coefficients(&state.m);

        let mut dt = self.config.dt_max.min(dt_cap);
        for (ci, hi) in c.iter().zip(&self.h_min) {
            if ci.abs() > 0.0 {
                dt = dt.min(self.config.cfl * hi / ci.abs());
            }
        }
        if dt < self.config.dt_min {
            return Err(SolverError::DtUnderflow { t: state.t });
        }

        // rhs = m + dt * C * (m_r), with the implicit diffusion folded into
        // a tridiagonal system over the interior nodes
        let m = &state.m;
        let mut rhs = vec![0.0; n - 1];
        let mut lo = vec![0.0; n - 1];
        let mut di = vec![0.0; n - 1];
        let mut up = vec![0.0; n - 1];
        for k in 0..n - 1 {
            let grad =
                self.d1_lower[k] * m[k] + self.d1_diag[k] * m[k + 1] + self.d1_upper[k] * m[k + 2];
            rhs[k] = m[k + 1] + dt * c[k] * grad;
            lo[k] = -dt * self.lower_l[k];
            di[k] = 1.0 - dt * self.diag_l[k];
            up[k] = -dt * self.upper_l[k];
        }
        // boundary conditions m(0) = 0, m(R_max) = total
        rhs[n - 2] += dt * self.upper_l[n - 2] * total;
        solve_tridiagonal(&lo, &di, &up, &mut rhs);

        // monotone projection keeps the density nonnegative; the moved mass
        // is returned as consistency telemetry
        let mut new_m = Vec::with_capacity(n + 1);
        new_m.push(0.0);
        new_m.extend_from_slice(&rhs);
        new_m.push(total);
        let mut projected = 0.0;
        let mut running = 0.0;
        for v in new_m.iter_mut().take(n).skip(1) {
            let clamped = v.clamp(running, total);
            projected += (clamped - *v).abs();
            *v = clamped;
            running = clamped;
        }
        Ok((SolverState { t: state.t + dt, m: new_m, grid: state.grid.clone() }, dt, projected))
    }
}

/// Angular mean kernel of the regularized attraction field:
/// `k(r, s) = (1/2pi) int (r - s cos a) / (d (d + eps)) da`,
/// `d = sqrt(r^2 + s^2 - 2 r s cos a)`. For eps = 0 this collapses to the
/// Gauss law `1/r` inside and 0 outside.
fn build_regularized_kernel(grid: &RadialGrid, eps: f64) -> Vec<f64> {
    let n = grid.n_cells();
    let nodes = grid.nodes();
    let n_theta = 128;
    let mut kernel = vec![0.0; (n - 1) * n];
    for i in 1..n {
        let r = nodes[i];
        for j in 0..n {
            let s = grid.cell_mid(j);
            let mut acc = 0.0;
            for k in 0..n_theta {
                let theta = 2.0 * PI * k as f64 / n_theta as f64;
                let cos_t = theta.cos();
                let d2 = r * r + s * s - 2.0 * r * s * cos_t;
                let d = d2.max(0.0).sqrt();
                if d > 1e-14 {
                    acc += (r - s * cos_t) / (d * (d + eps));
                }
            }
            kernel[(i - 1) * n + j] = acc / n_theta as f64;
        }
    }
    kernel
}

fn sample_diagnostics(
    state: &SolverState,
    lambda_ref: f64,
    dt: f64,
    proj: f64,
    rescaled_target: Option<&GelfandSolution>,
) -> TrajectorySample {
    let rho = state.density();
    let mom = rho.moments_and_entropy();
    let f = energy::f_pks(&rho);
    let h = energy::relative_entropy(&rho, lambda_ref)
        .map(|h| match h {
            TailChecked::Finite(v) => v,
            TailChecked::Divergent(_) => f64::NAN,
        })
        .unwrap_or(f64::NAN);
    let (mut f_rescaled, mut l1, mut wl2) = (None, None, None);
    if let Some(g) = rescaled_target {
        f_rescaled = Some(f + 0.5 * mom.second_moment.value());
        let mut acc = 0.0;
        let mut accw = 0.0;
        let u_floor = 1e-14 * g.u_inf.max_value();
        for ((a, b), w) in rho.values().iter().zip(g.u_inf.values()).zip(rho.grid().weights()) {
            acc += (a - b).abs() * w;
            if *b > u_floor {
                accw += (a - b) * (a - b) / b * w;
            }
        }
        l1 = Some(acc);
        wl2 = Some(accw);
    }
    TrajectorySample {
        t: state.t,
        mass: mom.mass,
        second_moment: mom.second_moment.value(),
        entropy: mom.entropy,
        f_pks: f,
        h_lambda: h,
        dissipation: energy::dissipation(&rho),
        rho_max: state.rho_max(),
        dt,
        projection_l1: proj,
        f_rescaled,
        l1_to_stationary: l1,
        weighted_l2_to_stationary: wl2,
    }
}

fn run_inner(
    rho0: &RadialDensity,
    solver: &Solver2d,
    rescaled_target: Option<&GelfandSolution>,
) -> Result<Trajectory> {
    let config = &solver.config;
    let mut state = SolverState::from_density(rho0);
    let mut samples = Vec::new();
    let mut states = Vec::new();
    let mut verdict = None;

    let mut next_sample = 0.0;
    let mut proj_accum = 0.0;
    let mut last_dt = f64::NAN;
    let mut zoom_rho_trigger = state.rho_max() * 2.0;

    loop {
        if state.t >= next_sample - 1e-12 {
            let s = sample_diagnostics(&state, config.lambda_ref, last_dt, proj_accum, rescaled_target);
            proj_accum = 0.0;
            samples.push(s);
            if config.store_states {
                states.push((state.t, state.density()));
            }
            next_sample += config.cadence;
        }
        if state.t >= config.t_end - 1e-12 {
            break;
        }
        let rho_max = state.rho_max();
        if rho_max > config.rho_max_ceiling {
            verdict = Some(BlowupVerdict {
                detected: true,
                t_estimate: state.t,
                criterion: VerdictCriterion::RhoMaxCeiling,
                rho_max,
            });
            break;
        }
        let cap = (next_sample - state.t).min(config.t_end - state.t).max(1e-15);
        match solver.step(&state, cap) {
            Ok((next, dt, proj)) => {
                state = next;
                last_dt = dt;
                proj_accum += proj;
                if config.store_states && state.rho_max() >= zoom_rho_trigger {
                    states.push((state.t, state.density()));
                    zoom_rho_trigger = state.rho_max() * 2.0;
                }
            }
            Err(SolverError::DtUnderflow { t }) => {
                verdict = Some(BlowupVerdict {
                    detected: true,
                    t_estimate: t,
                    criterion: VerdictCriterion::DtCollapse,
                    rho_max,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    // final sample at the stopping time
    let s = sample_diagnostics(&state, config.lambda_ref, last_dt, proj_accum, rescaled_target);
    samples.push(s);
    if config.store_states {
        states.push((state.t, state.density()));
    }
    Ok(Trajectory { samples, states, verdict, mass: state.mass() })
}

/// Integrate the 2d system to `t_end` or until a blowup verdict.
pub fn run(rho0: &RadialDensity, config: &SolverConfig) -> Result<Trajectory> {
    let solver = Solver2d::new(rho0.grid().clone(), *config, false)?;
    run_inner(rho0, &solver, None)
}

/// Companion data of a rescaled run.
#[derive(Debug, Clone)]
pub struct RescaledInfo {
    pub stationary: GelfandSolution,
    /// Fitted exponential decay rate of the weighted L2 distance.
    pub decay_rate: Option<f64>,
}

/// Integrate the rescaled system (confinement drift `+x`); records the
/// distance to the stationary rescaled profile and fits its decay rate.
pub fn run_rescaled(rho0: &RadialDensity, config: &SolverConfig) -> Result<(Trajectory, RescaledInfo)> {
    let mass = rho0.mass();
    if mass >= 8.0 * PI {
        return Err(SolverError::InvalidConfig(
            "rescaled runs require subcritical mass".into(),
        ));
    }
    let stationary = crate::gelfand::solve_gelfand(mass, rho0.grid(), 1e-11, 2000, 0.7)?;
    let solver = Solver2d::new(rho0.grid().clone(), *config, true)?;
    let traj = run_inner(rho0, &solver, Some(&stationary))?;

    // fit log(weighted L2) over the window where the signal is clean
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    let d0 = traj.samples.first().and_then(|s| s.weighted_l2_to_stationary).unwrap_or(1.0);
    for s in &traj.samples {
        if let Some(d) = s.weighted_l2_to_stationary {
            if d > 1e-9 * d0.max(1e-9) && d < 0.5 * d0 {
                ts.push(s.t);
                logs.push(d.ln());
            }
        }
    }
    let decay_rate = if ts.len() >= 4 {
        Some(-linear_fit(&ts, &logs).0)
    } else {
        None
    };
    Ok((traj, RescaledInfo { stationary, decay_rate }))
}
