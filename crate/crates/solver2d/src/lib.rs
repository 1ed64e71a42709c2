//! Time integration of the 2d chemotaxis system in radial symmetry.
//!
//! The evolved unknown is the cumulative mass `m(r, t)` rather than the
//! density: with `rho = m_r / (2 pi r)` and the attraction field
//! `c_r = -m / (2 pi r)` the system collapses to a single local equation
//!
//! ```text
//! m_t = m_rr - m_r / r + m m_r / (2 pi r)        (original variables)
//! m_t = m_rr - m_r / r + (m / (2 pi r) - r) m_r  (rescaled variables)
//! ```
//!
//! with `m(0) = 0` and `m(R_max) = M` pinned, so mass is conserved exactly
//! and monotonicity of `m` (nonnegativity of the density) can be enforced
//! by projection. Diffusion is treated implicitly (one tridiagonal solve
//! per step), the drift explicitly with an adaptive CFL time step; the
//! collapse of the time step doubles as a blowup sensor.

pub mod config;
pub mod diagnostics;
pub mod gelfand;
pub mod presets;
pub mod solver;

pub use config::{GridConfig, KernelMode, SolverConfig};
pub use diagnostics::{blowup_upper_bound, blowup_zoom, virial_diagnostic, ZoomReport};
pub use gelfand::{solve_gelfand, GelfandSolution};
pub use presets::InitialData;
pub use solver::{
    run, run_rescaled, BlowupVerdict, RescaledInfo, Solver2d, SolverState, Trajectory,
    TrajectorySample, VerdictCriterion,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Core(#[from] pks_core::CoreError),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("time step collapsed below dt_min at t = {t}")]
    DtUnderflow { t: f64 },
    #[error("fixed point did not converge: residual {residual:.3e} after {iters} iterations")]
    NoConvergence { residual: f64, iters: usize },
    #[error("{0}")]
    Diagnostic(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
