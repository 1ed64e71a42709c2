//! Sharp functional inequalities as executable checks.
//!
//! Every evaluator reports a deficit or gap with the convention
//! ">= 0 means the inequality is satisfied":
//!
//! * logarithmic HLS: `int f log f + (2/M) II f f log|x-y| + C(M) >= 0`
//!   with `C(M) = M (1 + log pi - log M)`; equality on the steady profiles.
//! * GNS: `int u^4 <= C_GNS int |grad u|^2 int u^2`; the sharp constant is
//!   estimated from trial families (Gaussian floor `1/(2 pi)`).
//! * The sixth-power GNS form: `pi int f^6 <= int |grad f|^2 int f^4`,
//!   equality iff `f` is a multiple of a steady profile to the power 1/4.
//! * A first-moment bound and a Talagrand-type transport bound against the
//!   relative entropy (finite-relative-entropy inputs only).
//!
//! Corpus members are evaluated with analytic derivatives and fixed
//! geometric-panel quadrature whose resolution-halving error rides along in
//! the report.

use crate::corpus::CorpusMember;
use crate::density::{steady_profile_value, RadialDensity};
use crate::grid::RadialGrid;
use crate::numerics::{gauss_legendre, gl_integrate, golden_max};
use crate::quantile::wasserstein2_radial;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `C(M) = M (1 + log pi - log M)`, the sharp log-HLS constant.
pub fn log_hls_constant(mass: f64) -> f64 {
    mass * (1.0 + PI.ln() - mass.ln())
}

/// Fixed geometric-panel quadrature of `g(r) 2 pi r dr` on `[0, r_max]`.
///
/// One linear panel `[0, r0]` plus `panels_per_decade` Gauss-Legendre
/// panels per decade of `[r0, r_max]`; r0 = 1e-6.
pub fn radial_quad(g: &dyn Fn(f64) -> f64, r_max: f64, panels_per_decade: usize) -> f64 {
    let (gx, gw) = gauss_legendre(16);
    let f = |r: f64| g(r) * 2.0 * PI * r;
    let r0 = 1e-6;
    let mut acc = gl_integrate(&f, 0.0, r0, &gx, &gw);
    let decades = (r_max / r0).log10();
    let n_panels = (decades * panels_per_decade as f64).ceil() as usize;
    let ratio = (r_max / r0).powf(1.0 / n_panels as f64);
    let mut a = r0;
    for _ in 0..n_panels {
        let b = (a * ratio).min(r_max);
        acc += gl_integrate(&f, a, b, &gx, &gw);
        a = b;
    }
    acc
}

/// Integration window; steady tails decay like `r^-4`, so the integrals
/// used here converge well before this cutoff.
const QUAD_R_MAX: f64 = 1e6;
const QUAD_PANELS: usize = 24;

fn quad(g: &dyn Fn(f64) -> f64) -> f64 {
    radial_quad(g, QUAD_R_MAX, QUAD_PANELS)
}

fn quad_coarse(g: &dyn Fn(f64) -> f64) -> f64 {
    radial_quad(g, QUAD_R_MAX, QUAD_PANELS / 2)
}

/// All gaps/deficits for one input, each with the ">= 0 means satisfied"
/// sign convention, plus the quadrature tolerance they carry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub label: String,
    pub lambda: f64,
    pub mass: f64,
    /// Estimated quadrature error (resolution-halving difference, relative).
    pub quad_tol: f64,
    pub log_hls_deficit: f64,
    /// `int u^4 / (int |grad u|^2 int u^2)` at `u = sqrt(rho)`; compare
    /// against the estimated sharp constant.
    pub gns_ratio: f64,
    /// `int |grad f|^2 int f^4 - pi int f^6` at `f = rho^{1/4}`, normalized
    /// by `pi int f^6`.
    pub gns6_gap: f64,
    /// Dissipation `D[rho]`; nonnegative exactly at the critical mass.
    pub dissipation: f64,
    /// `2 sqrt(lambda) M + 2 M^{3/4} (lambda/pi)^{1/4} sqrt(H) - int sqrt(lambda + r^2) rho`.
    pub moment_bound_gap: Option<f64>,
    /// Transport bound `sqrt(H sqrt(M lambda / pi)) - W_2(rho, steady)`,
    /// implemented exactly as printed in the source material.
    pub talagrand_gap: Option<f64>,
    pub h_lambda: Option<f64>,
}

/// Evaluate the full inequality suite on an analytic corpus member.
pub fn inequality_suite(member: &CorpusMember, lambda: f64) -> Result<InequalityReport> {
    let mass = member.mass();
    let u = |r: f64| member.value(r).max(0.0);
    let du = |r: f64| member.deriv(r);

    // entropy and interaction via the cumulative-mass reduction
    let entropy = quad(&|r| {
        let v = u(r);
        if v > 1e-120 {
            v * v.ln()
        } else {
            0.0
        }
    });
    let interaction = 2.0 * quad(&|r| {
        if r == 0.0 {
            0.0
        } else {
            r.ln() * member.cum_mass(r) * u(r)
        }
    });
    let log_hls_deficit = entropy + 2.0 / mass * interaction + log_hls_constant(mass);

    // GNS at u = sqrt(rho): |grad sqrt(rho)|^2 = rho'^2 / (4 rho)
    let grad_sq = quad(&|r| {
        let v = u(r);
        if v > 1e-120 {
            du(r).powi(2) / (4.0 * v)
        } else {
            0.0
        }
    });
    let int_rho_sq = quad(&|r| u(r).powi(2));
    let gns_ratio = int_rho_sq / (grad_sq * mass);

    // sixth-power form at f = rho^{1/4}
    let grad_quarter = quad(&|r| {
        let v = u(r);
        if v > 1e-120 {
            du(r).powi(2) / (16.0 * v.powf(1.5))
        } else {
            0.0
        }
    });
    let int_three_half = quad(&|r| u(r).powf(1.5));
    let gns6_gap = (grad_quarter * mass - PI * int_three_half) / (PI * int_three_half);
    let dissipation = 8.0 * grad_quarter - int_three_half;

    // relative entropy pieces (finite-tail members only)
    let (mut h_lambda, mut moment_bound_gap, mut talagrand_gap) = (None, None, None);
    if member.finite_h_lambda == Some(lambda) {
        let h = quad(&|r| {
            let rv = steady_profile_value(lambda, mass, r);
            let diff = u(r).sqrt() - rv.sqrt();
            diff * diff / rv.sqrt()
        });
        h_lambda = Some(h);
        let lhs = quad(&|r| (lambda + r * r).sqrt() * u(r));
        let rhs = 2.0 * lambda.sqrt() * mass
            + 2.0 * mass.powf(0.75) * (lambda / PI).powf(0.25) * h.max(0.0).sqrt();
        moment_bound_gap = Some(rhs - lhs);

        // Talagrand-type bound, constant as printed
        let grid = RadialGrid::graded(2, 2048, 1e3, 1e4)?;
        let rho_grid = member.discretize(&grid)?;
        let steady =
            crate::density::make_steady_profile_truncated(lambda, rho_grid.mass(), &grid)?;
        let w2 = wasserstein2_radial(&rho_grid, &steady, 4096)?;
        if let Some(dist) = w2.distance() {
            let bound = (h.max(0.0) * (mass * lambda / PI).sqrt()).sqrt();
            talagrand_gap = Some(bound - dist);
        }
    }

    // quadrature tolerance: repeat the stiffest integrals at half resolution
    let entropy_c = quad_coarse(&|r| {
        let v = u(r);
        if v > 1e-120 {
            v * v.ln()
        } else {
            0.0
        }
    });
    let grad_c = quad_coarse(&|r| {
        let v = u(r);
        if v > 1e-120 {
            du(r).powi(2) / (4.0 * v)
        } else {
            0.0
        }
    });
    let quad_tol = ((entropy - entropy_c).abs() / entropy.abs().max(1e-30))
        .max((grad_sq - grad_c).abs() / grad_sq.abs().max(1e-30));

    Ok(InequalityReport {
        label: member.label.clone(),
        lambda,
        mass,
        quad_tol,
        log_hls_deficit,
        gns_ratio,
        gns6_gap,
        dissipation,
        moment_bound_gap,
        talagrand_gap,
        h_lambda,
    })
}

/// Evaluate the log-HLS deficit on a grid density (exact integrals of the
/// piecewise-constant representation, so the theorem applies verbatim).
pub fn log_hls_deficit_grid(rho: &RadialDensity) -> f64 {
    let mom = rho.moments_and_entropy();
    let interaction = crate::potential::interaction_log(rho);
    mom.entropy + 2.0 / mom.mass * interaction + log_hls_constant(mom.mass)
}

/// A trial shape for the GNS-constant search (all scale-invariant ratios).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GnsTrial {
    /// `exp(-r^2/2)`; ratio is exactly `1/(2 pi)`.
    Gaussian,
    /// `(1 + r^2)^{-p}` (bump-like).
    RationalBump { p: f64 },
    /// `1 / (1 + exp((r - radius)/width))` (plateau-like).
    Plateau { radius: f64, width: f64 },
    /// `sech(r)^p`.
    Sech { p: f64 },
}

impl GnsTrial {
    fn value(&self, r: f64) -> f64 {
        match *self {
            GnsTrial::Gaussian => (-r * r / 2.0).exp(),
            GnsTrial::RationalBump { p } => (1.0 + r * r).powf(-p),
            GnsTrial::Plateau { radius, width } => 1.0 / (1.0 + ((r - radius) / width).exp()),
            GnsTrial::Sech { p } => (1.0 / r.cosh()).powf(p),
        }
    }

    fn deriv(&self, r: f64) -> f64 {
        match *self {
            GnsTrial::Gaussian => -r * (-r * r / 2.0).exp(),
            GnsTrial::RationalBump { p } => -2.0 * p * r * (1.0 + r * r).powf(-p - 1.0),
            GnsTrial::Plateau { radius: _, width } => {
                let v = self.value(r);
                -v * (1.0 - v) / width
            }
            GnsTrial::Sech { p } => -p * r.tanh() * self.value(r),
        }
    }

    fn label(&self) -> String {
        match *self {
            GnsTrial::Gaussian => "gaussian".into(),
            GnsTrial::RationalBump { p } => format!("rational_bump(p={p:.6})"),
            GnsTrial::Plateau { radius, width } => format!("plateau(R={radius},w={width})"),
            GnsTrial::Sech { p } => format!("sech(p={p:.6})"),
        }
    }
}

/// `int u^4 / (int |grad u|^2 int u^2)` for a trial shape.
pub fn gns_trial_ratio(trial: &GnsTrial) -> f64 {
    let r_max = 200.0;
    let u4 = radial_quad(&|r| trial.value(r).powi(4), r_max, 32);
    let u2 = radial_quad(&|r| trial.value(r).powi(2), r_max, 32);
    let g2 = radial_quad(&|r| trial.deriv(r).powi(2), r_max, 32);
    u4 / (g2 * u2)
}

/// Result of the GNS constant search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CGnsEstimate {
    /// Lower bound for the sharp constant (max ratio over the corpus).
    pub c_gns: f64,
    /// Implied global-existence mass threshold `4 / C_GNS`.
    pub threshold_mass: f64,
    pub best_label: String,
    pub ratios: Vec<(String, f64)>,
}

/// Estimate the sharp GNS constant from trial shapes, then refine the
/// scalar parameter of the best family by golden-section search.
pub fn estimate_c_gns(corpus: &[GnsTrial]) -> CGnsEstimate {
    let mut ratios: Vec<(String, f64)> = corpus
        .iter()
        .map(|t| (t.label(), gns_trial_ratio(t)))
        .collect();
    let (mut best_idx, mut best) = (0usize, f64::MIN);
    for (i, (_, r)) in ratios.iter().enumerate() {
        if *r > best {
            best = *r;
            best_idx = i;
        }
    }
    let mut best_label = ratios[best_idx].0.clone();
    // local refinement around the best candidate's parameter
    match corpus[best_idx] {
        GnsTrial::RationalBump { p } => {
            let (p_star, v) = golden_max(
                |q| gns_trial_ratio(&GnsTrial::RationalBump { p: q }),
                (p - 1.0).max(0.6),
                p + 1.0,
                1e-6,
            );
            if v > best {
                best = v;
                best_label = GnsTrial::RationalBump { p: p_star }.label();
                ratios.push((best_label.clone(), v));
            }
        }
        GnsTrial::Sech { p } => {
            let (p_star, v) = golden_max(
                |q| gns_trial_ratio(&GnsTrial::Sech { p: q }),
                (p - 1.0).max(0.2),
                p + 1.0,
                1e-6,
            );
            if v > best {
                best = v;
                best_label = GnsTrial::Sech { p: p_star }.label();
                ratios.push((best_label.clone(), v));
            }
        }
        _ => {}
    }
    CGnsEstimate { c_gns: best, threshold_mass: 4.0 / best, best_label, ratios }
}

/// Default trial corpus: the Gaussian floor, bump-like rational profiles,
/// sech powers and plateau shapes.
pub fn default_gns_corpus() -> Vec<GnsTrial> {
    let mut v = vec![GnsTrial::Gaussian];
    for p in [1.0, 1.5, 2.0, 2.5, 3.0] {
        v.push(GnsTrial::RationalBump { p });
    }
    for p in [0.5, 1.0, 2.0] {
        v.push(GnsTrial::Sech { p });
    }
    for (radius, width) in [(2.0, 0.5), (4.0, 1.0), (8.0, 1.0)] {
        v.push(GnsTrial::Plateau { radius, width });
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_corpus;

    #[test]
    fn log_hls_constant_closed_form() {
        let m = 8.0 * PI;
        // C(8 pi) = 8 pi (1 - log 8)
        assert!((log_hls_constant(m) - m * (1.0 - (8.0f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn gaussian_gns_ratio_is_one_over_two_pi() {
        let r = gns_trial_ratio(&GnsTrial::Gaussian);
        assert!((r - 1.0 / (2.0 * PI)).abs() < 1e-10, "{r}");
    }

    #[test]
    fn gns_ratio_is_scale_and_amplitude_invariant() {
        // the quotient is invariant under u -> a u(b x); rational bumps with
        // rescaled argument are a different trial only through p
        let base = gns_trial_ratio(&GnsTrial::RationalBump { p: 2.0 });
        // amplitude invariance is structural (ratio of homogeneous integrals);
        // emulate a rescaling by integrating a dilated profile directly
        let dilated = {
            let val = |r: f64| 3.0 * (1.0 + (0.5 * r) * (0.5 * r)).powf(-2.0);
            let der = |r: f64| 3.0 * (-2.0) * (0.5 * r) * 0.5 * (1.0 + (0.5 * r) * (0.5 * r)).powf(-3.0) * 2.0;
            let u4 = radial_quad(&|r| val(r).powi(4), 400.0, 32);
            let u2 = radial_quad(&|r| val(r).powi(2), 400.0, 32);
            let g2 = radial_quad(&|r| der(r).powi(2), 400.0, 32);
            u4 / (g2 * u2)
        };
        assert!(((base - dilated) / base).abs() < 1e-9, "{base} vs {dilated}");
    }

    #[test]
    fn estimated_threshold_is_close_to_reference_value() {
        let est = estimate_c_gns(&default_gns_corpus());
        let reference = 1.862 * 4.0 * PI;
        assert!(
            (est.threshold_mass - reference).abs() / reference < 0.02,
            "4/C = {} vs {reference}",
            est.threshold_mass
        );
        // every corpus ratio is below the estimate
        for (label, r) in &est.ratios {
            assert!(*r <= est.c_gns + 1e-8, "{label}: {r} > {}", est.c_gns);
        }
    }

    #[test]
    fn steady_profile_attains_log_hls_equality() {
        for lambda in [0.5, 1.0, 2.0] {
            let member = CorpusMember {
                label: "steady".into(),
                components: vec![(8.0 * PI, crate::corpus::Component::Steady { lambda })],
                finite_h_lambda: Some(lambda),
            };
            let rep = inequality_suite(&member, lambda).unwrap();
            let scale = log_hls_constant(8.0 * PI).abs();
            assert!(
                rep.log_hls_deficit.abs() / scale < 1e-4,
                "lambda={lambda}: deficit {}",
                rep.log_hls_deficit
            );
            // sixth-power form equality at f = steady^{1/4}
            assert!(rep.gns6_gap.abs() < 1e-6, "gns6 gap {}", rep.gns6_gap);
            // dissipation vanishes at the steady profile
            assert!(rep.dissipation.abs() < 1e-6, "D = {}", rep.dissipation);
            assert!(rep.h_lambda.unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn corpus_deficits_are_nonnegative() {
        let members = generate_corpus(2024, 40, 8.0 * PI, 0.4);
        let est = estimate_c_gns(&default_gns_corpus());
        for m in &members {
            let rep = inequality_suite(m, m.finite_h_lambda.unwrap_or(1.0)).unwrap();
            assert!(rep.log_hls_deficit >= -1e-8, "{}: log-HLS {}", m.label, rep.log_hls_deficit);
            assert!(rep.gns_ratio <= est.c_gns + 1e-8, "{}: GNS {}", m.label, rep.gns_ratio);
            assert!(rep.gns6_gap >= -1e-8, "{}: gns6 {}", m.label, rep.gns6_gap);
            assert!(rep.dissipation >= -1e-8, "{}: D {}", m.label, rep.dissipation);
            if let Some(g) = rep.moment_bound_gap {
                assert!(g >= -1e-8, "{}: moment bound {}", m.label, g);
            }
        }
    }
}
