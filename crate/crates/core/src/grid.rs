//! Radial grids with exact shell volumes.
//!
//! A grid is a strictly increasing sequence of node radii
//! `0 = r_0 < r_1 < ... < r_N = R_max` together with the geometric volume
//! of every shell `(r_{i-1}, r_i)`: `pi (r_i^2 - r_{i-1}^2)` in 2d and
//! `(sigma_d / d) (r_i^d - r_{i-1}^d)` in general dimension, where
//! `sigma_d = 2 pi^{d/2} / Gamma(d/2)` is the surface area of the unit
//! sphere. Weights telescope, so their sum equals the ball volume exactly.

use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// Surface area of the unit sphere S^{d-1} in R^d.
pub fn sphere_surface_area(dim: u32) -> f64 {
    let d = dim as f64;
    2.0 * std::f64::consts::PI.powf(d / 2.0) / gamma_half_integer(dim)
}

/// Gamma(d/2) for integer d >= 1, via the half-integer closed forms.
fn gamma_half_integer(d: u32) -> f64 {
    if d % 2 == 0 {
        // Gamma(k) = (k-1)!
        let k = d / 2;
        (1..k).map(|j| j as f64).product::<f64>().max(1.0)
    } else {
        // Gamma(k + 1/2) = (2k)! sqrt(pi) / (4^k k!)
        let k = (d - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for j in 0..k {
            g *= j as f64 + 0.5;
        }
        g
    }
}

/// How node radii are distributed on `[0, R_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Uniform { n: usize, r_max: f64 },
    /// Geometric cell widths; `grading` is the ratio of the outermost to the
    /// innermost cell width (grading > 1 concentrates cells at the origin).
    Graded { n: usize, r_max: f64, grading: f64 },
}

/// Node radii plus per-cell shell volumes for a fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    dim: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spec: GridSpec,
}

impl RadialGrid {
    pub fn uniform(dim: u32, n: usize, r_max: f64) -> Result<Self> {
        let nodes: Vec<f64> = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
        Self::from_nodes(dim, nodes, GridSpec::Uniform { n, r_max })
    }

    /// Geometrically graded grid: cell widths grow by a constant factor so
    /// that the outermost cell is `grading` times wider than the innermost.
    pub fn graded(dim: u32, n: usize, r_max: f64, grading: f64) -> Result<Self> {
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(CoreError::InvalidGrid("grading must be >= 1".into()));
        }
        if grading == 1.0 {
            return Self::uniform(dim, n, r_max);
        }
        let q = grading.powf(1.0 / (n as f64 - 1.0));
        // widths w_i = w_0 q^i, sum = w_0 (q^n - 1)/(q - 1) = r_max
        let w0 = r_max * (q - 1.0) / (q.powi(n as i32) - 1.0);
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut w = w0;
        let mut r = 0.0;
        for _ in 0..n {
            r += w;
            nodes.push(r);
            w *= q;
        }
        // kill accumulated round-off at the boundary
        *nodes.last_mut().unwrap() = r_max;
        Self::from_nodes(dim, nodes, GridSpec::Graded { n, r_max, grading })
    }

    pub fn from_spec(dim: u32, spec: GridSpec) -> Result<Self> {
        match spec {
            GridSpec::Uniform { n, r_max } => Self::uniform(dim, n, r_max),
            GridSpec::Graded { n, r_max, grading } => Self::graded(dim, n, r_max, grading),
        }
    }

    /// Build from explicit node radii (validated), keeping `spec` as a
    /// descriptive label. Used when nodes come from a file or a dilation.
    pub(crate) fn from_nodes_unchecked(dim: u32, nodes: Vec<f64>, spec: GridSpec) -> Result<Self> {
        Self::from_nodes(dim, nodes, spec)
    }

    fn from_nodes(dim: u32, nodes: Vec<f64>, spec: GridSpec) -> Result<Self> {
        if dim < 2 {
            return Err(CoreError::InvalidGrid("dimension must be >= 2".into()));
        }
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(CoreError::InvalidGrid("need nodes 0 = r_0 < ... < r_N".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(CoreError::InvalidGrid("node radii must increase strictly".into()));
            }
        }
        let sigma = sphere_surface_area(dim);
        let vol_coeff = sigma / dim as f64;
        let weights: Vec<f64> = nodes
            .windows(2)
            .map(|w| vol_coeff * (w[1].powi(dim as i32) - w[0].powi(dim as i32)))
            .collect();
        Ok(RadialGrid { dim, nodes, weights, spec })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Number of cells.
    pub fn n_cells(&self) -> usize {
        self.weights.len()
    }

    /// Node radii, length `n_cells() + 1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Shell volumes, length `n_cells()`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn sigma_d(&self) -> f64 {
        sphere_surface_area(self.dim)
    }

    /// Midpoint radius of cell `i`.
    pub fn cell_mid(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }

    /// Volume of the ball of radius `r` in this grid's dimension.
    pub fn ball_volume(&self, r: f64) -> f64 {
        self.sigma_d() / self.dim as f64 * r.powi(self.dim as i32)
    }

    /// Index of the cell containing radius `r` (clamped to the last cell).
    pub fn cell_of(&self, r: f64) -> usize {
        if r <= 0.0 {
            return 0;
        }
        let i = match self.nodes.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) | Err(i) => i,
        };
        i.saturating_sub(1).min(self.n_cells() - 1)
    }
}
