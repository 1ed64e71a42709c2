//! The attractive potential of a radial density and the interaction
//! integrals, via the Gauss reduction.
//!
//! For radial data the Poisson field is local in the cumulative mass:
//! in 2d the kernel is `-log|x| / 2pi` and
//!
//! ```text
//! c_r(r) = -m(r) / (2 pi r),
//! c(r)   = -(1/2pi) [ log(r) m(r) + int_{s>r} log(s) dm(s) ],
//! ```
//!
//! while for d >= 3 the kernel is `c_d |x|^{2-d}` with
//! `c_d = 1/((d-2) sigma_d)` and
//!
//! ```text
//! phi_r(r) = -m(r) / (sigma_d r^{d-1}),
//! phi(r)   = c_d [ m(r) r^{2-d} + int_{s>r} s^{2-d} dm(s) ].
//! ```
//!
//! The interaction integrals reduce by the same spherical mean-value
//! identity to `2 int K(r) m(r) dm(r)` with `K = log r` resp. `r^{2-d}`,
//! which is evaluated in closed form cell by cell for the
//! piecewise-constant density: an O(N) route. A literal O(N^2) pairwise
//! double sum over cells is kept as an independent oracle for tests.

use crate::density::RadialDensity;

/// Riesz-kernel normalisation constant `c_d = 1/((d-2) sigma_d)`.
pub fn riesz_constant(dim: u32) -> f64 {
    assert!(dim >= 3);
    1.0 / ((dim as f64 - 2.0) * crate::grid::sphere_surface_area(dim))
}

/// Antiderivative of `r log r`: `r^2 (2 log r - 1) / 4`, continuous at 0.
fn f1(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * (2.0 * r.ln() - 1.0) / 4.0
    }
}

/// Antiderivative of `r^3 log r`: `r^4 (4 log r - 1) / 16`, continuous at 0.
fn f3(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.powi(4) * (4.0 * r.ln() - 1.0) / 16.0
    }
}

/// Radial potential samples at the grid nodes.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    /// d/dr of the potential at each node; 0 at r = 0.
    pub grad: Vec<f64>,
    /// Potential value at each node (the decaying/far-field branch).
    pub value: Vec<f64>,
}

/// Potential of a radial density: `c = G * rho` in 2d, `phi = K * rho`
/// in d >= 3. `grad[0] = 0` is the exact limit at the origin.
pub fn chemoattractant_field(rho: &RadialDensity) -> RadialPotential {
    let grid = rho.grid();
    let nodes = grid.nodes();
    let m = rho.cum_mass();
    let n = grid.n_cells();
    let dim = grid.dim();
    let sigma = grid.sigma_d();

    let mut grad = vec![0.0; n + 1];
    for i in 1..=n {
        grad[i] = -m[i] / (sigma * nodes[i].powi(dim as i32 - 1));
    }

    // Outer integrals T_i = int_{s > r_i} K(s) dm(s), accumulated backwards.
    let mut value = vec![0.0; n + 1];
    if dim == 2 {
        let mut tail = 0.0;
        let two_pi = 2.0 * std::f64::consts::PI;
        for i in (0..n).rev() {
            let b = std::f64::consts::PI * rho.values()[i];
            // int_{cell} log s dm = 2 pi rho int s log s ds
            let cell = 2.0 * b * (f1(nodes[i + 1]) - f1(nodes[i]));
            let log_r = if nodes[i] == 0.0 { 0.0 } else { nodes[i].ln() };
            value[i] = -(log_r * m[i] + tail + cell) / two_pi;
            tail += cell;
        }
        let log_rn = nodes[n].ln();
        value[n] = -(log_rn * m[n]) / two_pi;
    } else {
        let cd = riesz_constant(dim);
        let mut tail = 0.0;
        for i in (0..n).rev() {
            // int_{cell} s^{2-d} dm = sigma rho int s ds
            let cell = sigma * rho.values()[i] * (nodes[i + 1].powi(2) - nodes[i].powi(2)) / 2.0;
            let rpow = if nodes[i] == 0.0 { 0.0 } else { m[i] * nodes[i].powf(2.0 - dim as f64) };
            value[i] = cd * (rpow + tail + cell);
            tail += cell;
        }
        value[n] = cd * m[n] * nodes[n].powf(2.0 - dim as f64);
    }
    RadialPotential { grad, value }
}

/// `II rho(x) rho(y) log|x-y| dx dy` for a 2d radial density, exact for the
/// piecewise-constant representation (O(N) cumulative route).
pub fn interaction_log(rho: &RadialDensity) -> f64 {
    assert_eq!(rho.grid().dim(), 2);
    let nodes = rho.grid().nodes();
    let m = rho.cum_mass();
    let mut acc = 0.0;
    for (i, &v) in rho.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let b = std::f64::consts::PI * v;
        let a = m[i] - b * nodes[i] * nodes[i];
        // int log r (a + b r^2) dm, dm = 2 b r dr
        acc += 2.0 * a * b * (f1(nodes[i + 1]) - f1(nodes[i]))
            + 2.0 * b * b * (f3(nodes[i + 1]) - f3(nodes[i]));
    }
    2.0 * acc
}

/// Literal O(N^2) pairwise oracle for `interaction_log`: per cell pair the
/// spherical mean of the kernel is `log max(r, s)` and the pair integral is
/// taken in closed form, without any cumulative-mass bookkeeping.
pub fn interaction_log_oracle(rho: &RadialDensity) -> f64 {
    assert_eq!(rho.grid().dim(), 2);
    let nodes = rho.grid().nodes();
    let vals = rho.values();
    let n = vals.len();
    let cell_mass: Vec<f64> =
        vals.iter().zip(rho.grid().weights()).map(|(v, w)| v * w).collect();
    let mut acc = 0.0;
    for j in 0..n {
        let bj = std::f64::consts::PI * vals[j];
        let lj = 2.0 * bj * (f1(nodes[j + 1]) - f1(nodes[j]));
        let mut inner_mass = 0.0;
        for i_mass in cell_mass.iter().take(j) {
            inner_mass += i_mass;
        }
        // distinct cells, both orderings
        acc += 2.0 * inner_mass * lj;
        // same-cell pairs: 2 int log r (m(r) - m_{j-}) dm(r) over the cell
        let a_loc = -bj * nodes[j] * nodes[j];
        acc += 2.0
            * (2.0 * a_loc * bj * (f1(nodes[j + 1]) - f1(nodes[j]))
                + 2.0 * bj * bj * (f3(nodes[j + 1]) - f3(nodes[j])));
    }
    acc
}

/// `II rho(x) rho(y) |x-y|^{2-d} dx dy` for a d >= 3 radial density
/// (without the `c_d` prefactor), exact for the cell-constant density.
pub fn interaction_riesz(rho: &RadialDensity) -> f64 {
    let dim = rho.grid().dim();
    assert!(dim >= 3);
    let d = dim as f64;
    let nodes = rho.grid().nodes();
    let m = rho.cum_mass();
    let sigma = rho.grid().sigma_d();
    let mut acc = 0.0;
    for (i, &v) in rho.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let b = sigma / d * v;
        let a = m[i] - b * nodes[i].powi(dim as i32);
        // int r^{2-d} (a + b r^d) dm, dm = d b r^{d-1} dr
        let i1 = (nodes[i + 1].powi(2) - nodes[i].powi(2)) / 2.0;
        let i2 = (nodes[i + 1].powi(dim as i32 + 2) - nodes[i].powi(dim as i32 + 2)) / (d + 2.0);
        acc += d * b * (a * i1 + b * i2);
    }
    2.0 * acc
}

/// Literal O(N^2) pairwise oracle for `interaction_riesz`.
pub fn interaction_riesz_oracle(rho: &RadialDensity) -> f64 {
    let dim = rho.grid().dim();
    assert!(dim >= 3);
    let d = dim as f64;
    let nodes = rho.grid().nodes();
    let vals = rho.values();
    let sigma = rho.grid().sigma_d();
    let n = vals.len();
    let cell_mass: Vec<f64> =
        vals.iter().zip(rho.grid().weights()).map(|(v, w)| v * w).collect();
    let mut acc = 0.0;
    for j in 0..n {
        let lj = sigma * vals[j] * (nodes[j + 1].powi(2) - nodes[j].powi(2)) / 2.0;
        let mut inner_mass = 0.0;
        for i_mass in cell_mass.iter().take(j) {
            inner_mass += i_mass;
        }
        acc += 2.0 * inner_mass * lj;
        let b = sigma / d * vals[j];
        let a_loc = -b * nodes[j].powi(dim as i32);
        let i1 = (nodes[j + 1].powi(2) - nodes[j].powi(2)) / 2.0;
        let i2 = (nodes[j + 1].powi(dim as i32 + 2) - nodes[j].powi(dim as i32 + 2)) / (d + 2.0);
        acc += 2.0 * d * b * (a_loc * i1 + b * i2);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::make_steady_profile;
    use crate::grid::RadialGrid;
    use std::f64::consts::PI;

    #[test]
    fn steady_profile_field_matches_closed_form() {
        // c_r(r) = -4r/(1+r^2) for the lambda = 1, M = 8 pi profile
        let g = RadialGrid::graded(2, 4096, 1000.0, 5000.0).unwrap();
        let p = make_steady_profile(1.0, 8.0 * PI, &g, 1e-3).unwrap();
        let field = chemoattractant_field(&p.density);
        for (i, &r) in g.nodes().iter().enumerate().skip(1).step_by(97) {
            let exact = -4.0 * r / (1.0 + r * r);
            assert!(
                (field.grad[i] - exact).abs() < 1e-10 * (1.0 + exact.abs()),
                "r={r}: {} vs {exact}",
                field.grad[i]
            );
        }
        assert_eq!(field.grad[0], 0.0);
    }

    #[test]
    fn steady_profile_potential_has_reference_shape() {
        // c(r) = -2 log(1 + r^2) + const for lambda = 1, M = 8 pi
        let g = RadialGrid::graded(2, 4096, 1000.0, 5000.0).unwrap();
        let p = make_steady_profile(1.0, 8.0 * PI, &g, 1e-3).unwrap();
        let field = chemoattractant_field(&p.density);
        let idx: Vec<usize> = (1..g.n_cells()).step_by(211).collect();
        let shift = field.value[idx[0]] + 2.0 * (1.0 + g.nodes()[idx[0]].powi(2)).ln();
        for &i in &idx {
            let r = g.nodes()[i];
            let expected = -2.0 * (1.0 + r * r).ln() + shift;
            assert!(
                (field.value[i] - expected).abs() < 2e-3,
                "r={r}: {} vs {expected}",
                field.value[i]
            );
        }
    }

    #[test]
    fn narrow_bump_field_obeys_gauss_law() {
        // point-like mass M at the origin: c_r -> -M/(2 pi r) outside the bump
        let g = RadialGrid::graded(2, 2048, 10.0, 2000.0).unwrap();
        let m = 3.7;
        let sigma: f64 = 0.01;
        let rho = RadialDensity::from_cumulative_fn(g.clone(), |r| {
            m * (1.0 - (-r * r / (2.0 * sigma * sigma)).exp())
        })
        .unwrap();
        let field = chemoattractant_field(&rho);
        for (i, &r) in g.nodes().iter().enumerate() {
            if r > 0.2 {
                let exact = -m / (2.0 * PI * r);
                assert!(((field.grad[i] - exact) / exact).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn log_interaction_matches_pairwise_oracle() {
        let g = RadialGrid::graded(2, 512, 30.0, 100.0).unwrap();
        let rho = RadialDensity::from_cumulative_fn(g, |r| {
            2.0 * (1.0 - (-r * r / 2.0).exp()) + 1.3 * r * r / (0.7 + r * r)
        })
        .unwrap();
        let fast = interaction_log(&rho);
        let slow = interaction_log_oracle(&rho);
        assert!(((fast - slow) / slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn steady_profile_log_interaction_has_closed_form() {
        // II rho rho log|x-y| = 32 pi^2 for lambda = 1, M = 8 pi
        // (from F_PKS[rho_1] = 8 pi (log 8 - 1) and the entropy 8 pi log 8 - 16 pi)
        let g = RadialGrid::graded(2, 8192, 1e6, 1e7).unwrap();
        let p = make_steady_profile(1.0, 8.0 * PI, &g, 1e-6).unwrap();
        let i_log = interaction_log(&p.density);
        assert!(
            ((i_log - 32.0 * PI * PI) / (32.0 * PI * PI)).abs() < 1e-4,
            "{i_log} vs {}",
            32.0 * PI * PI
        );
    }

    #[test]
    fn riesz_interaction_matches_pairwise_oracle() {
        let g = RadialGrid::graded(3, 512, 8.0, 50.0).unwrap();
        let rho = RadialDensity::from_cumulative_fn(g, |r| 1.0 - (-r * r / 2.0).exp()).unwrap();
        let fast = interaction_riesz(&rho);
        let slow = interaction_riesz_oracle(&rho);
        assert!(((fast - slow) / slow).abs() < 1e-12);
    }

    #[test]
    fn riesz_interaction_of_uniform_ball_matches_newton_formula() {
        // For a uniform ball of mass M, radius R in 3d:
        // II rho rho / |x-y| = (6/5) M^2 / R
        let g = RadialGrid::uniform(3, 4000, 2.0).unwrap();
        let r_ball = 1.0;
        let vol = 4.0 / 3.0 * PI;
        let m_tot = 5.0;
        let vals: Vec<f64> = (0..g.n_cells())
            .map(|i| if g.nodes()[i + 1] <= r_ball + 1e-12 { m_tot / vol } else { 0.0 })
            .collect();
        let rho = RadialDensity::from_cell_values(g, vals).unwrap();
        let i_riesz = interaction_riesz(&rho);
        let exact = 6.0 / 5.0 * m_tot * m_tot / r_ball;
        assert!(((i_riesz - exact) / exact).abs() < 1e-6, "{i_riesz} vs {exact}");
    }
}
