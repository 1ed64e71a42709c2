//! Radial building blocks for critical-mass aggregation-diffusion models.
//!
//! Everything here is formulated for radially symmetric densities on a
//! truncated domain `[0, R_max]`: graded radial grids, cell-averaged
//! densities with exact cumulative mass, the Poisson field obtained from
//! the cumulative mass (Gauss reduction), the free-energy functionals of
//! the 2d chemotaxis system and of its d >= 3 porous-medium variant, the
//! sharp functional inequalities attached to them, and the radial
//! 2-Wasserstein distance in quantile form.
//!
//! All operations are pure functions of value-semantic inputs and use
//! fixed-order summation, so results are bitwise reproducible.

pub mod corpus;
pub mod density;
pub mod energy;
pub mod grid;
pub mod inequality;
pub mod numerics;
pub mod ode;
pub mod params;
pub mod potential;
pub mod quantile;

pub use density::{Moments, RadialDensity, TailChecked};
pub use energy::{free_energy_suite, FreeEnergyReport};
pub use grid::RadialGrid;
pub use params::ModelParams;
pub use quantile::{wasserstein2_radial, QuantileProfile, W2Outcome};

use thiserror::Error;

/// Errors produced by grid/density construction and the functional evaluators.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("density invariant violated: {0}")]
    InvalidDensity(String),
    #[error("truncation: tail mass {tail_mass:.3e} beyond R_max exceeds tolerance {tol:.3e}")]
    Truncation { tail_mass: f64, tol: f64 },
    #[error("mass mismatch: {m1} vs {m2} (relative gap {rel:.3e})")]
    MassMismatch { m1: f64, m2: f64, rel: f64 },
    #[error("non-integrable input for {0}")]
    NonIntegrable(&'static str),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
