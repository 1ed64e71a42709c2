//! Adaptive Dormand-Prince 5(4) integration with event detection.
//!
//! Small, deterministic and sufficient for the shooting problems in this
//! workspace: scalar second-order equations written as first-order systems.
//! Events are scalar functions of (t, y); sign changes inside an accepted
//! step are located by bisection on the cubic Hermite interpolant.

/// Integration options.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h_init: 1e-6, h_max: 0.5, max_steps: 2_000_000 }
    }
}

/// A located event: sign change of event function `event` at time `t`.
#[derive(Debug, Clone)]
pub struct EventRecord {
    pub t: f64,
    pub y: Vec<f64>,
    pub event: usize,
    /// true when the event function crossed from negative to positive
    pub rising: bool,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    pub events: Vec<EventRecord>,
    /// false when the step count was exhausted before reaching t_end
    pub complete: bool,
}

/// Cubic Hermite interpolation on one accepted step.
fn hermite(t0: f64, y0: &[f64], f0: &[f64], t1: f64, y1: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len())
        .map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
        .collect()
}

#[rustfmt::skip]
mod tableau {
    pub const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    pub const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    pub const B4: [f64; 7] = [
        5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
        -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0,
    ];
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t_end`, recording every
/// accepted step and every sign change of the event functions.
pub fn integrate_dp45(
    f: &dyn Fn(f64, &[f64], &mut [f64]),
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &OdeOptions,
    events: &[&dyn Fn(f64, &[f64]) -> f64],
) -> OdeSolution {
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    f(t, &y, &mut k1);

    let mut ts = vec![t];
    let mut ys = vec![y.clone()];
    let mut recs: Vec<EventRecord> = Vec::new();
    let mut gvals: Vec<f64> = events.iter().map(|g| g(t, &y)).collect();

    let mut h = opts.h_init.min(opts.h_max).min(t_end - t0);
    let mut stages = vec![vec![0.0; dim]; 7];
    let mut complete = false;

    for _ in 0..opts.max_steps {
        if t >= t_end {
            complete = true;
            break;
        }
        if t + h > t_end {
            h = t_end - t;
        }

        stages[0].copy_from_slice(&k1);
        let mut ytmp = vec![0.0; dim];
        for s in 0..6 {
            for (i, yt) in ytmp.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, stage) in stages.iter().enumerate().take(s + 1) {
                    acc += tableau::A[s][j] * stage[i];
                }
                *yt = y[i] + h * acc;
            }
            let (head, tail) = stages.split_at_mut(s + 1);
            f(t + tableau::C[s] * h, &ytmp, &mut tail[0]);
            let _ = head;
        }
        // 5th-order solution is the last stage evaluation point (FSAL)
        let y5 = ytmp.clone();
        let f5 = stages[6].clone();

        // embedded 4th-order estimate for the error
        let mut err_norm = 0.0;
        for i in 0..dim {
            let mut y4 = y[i];
            for (s, stage) in stages.iter().enumerate() {
                y4 += h * tableau::B4[s] * stage[i];
            }
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4) / sc;
            err_norm += e * e;
        }
        err_norm = (err_norm / dim as f64).sqrt();

        if err_norm <= 1.0 || h <= 1e-14 * t.abs().max(1.0) {
            // accepted: locate events on the Hermite interpolant
            let t1 = t + h;
            for (ei, g) in events.iter().enumerate() {
                let g1 = g(t1, &y5);
                let g0 = gvals[ei];
                if g0 == 0.0 || g0.is_nan() || g1.is_nan() {
                    gvals[ei] = g1;
                    continue;
                }
                if (g0 < 0.0) != (g1 < 0.0) {
                    let (mut lo, mut hi) = (t, t1);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        let ym = hermite(t, &y, &k1, t1, &y5, &f5, mid);
                        let gm = g(mid, &ym);
                        if (gm < 0.0) == (g0 < 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        if hi - lo < 1e-15 * (1.0 + t1.abs()) {
                            break;
                        }
                    }
                    let te = 0.5 * (lo + hi);
                    recs.push(EventRecord {
                        t: te,
                        y: hermite(t, &y, &k1, t1, &y5, &f5, te),
                        event: ei,
                        rising: g1 > g0,
                    });
                }
                gvals[ei] = g1;
            }
            t = t1;
            y = y5;
            k1 = f5;
            ts.push(t);
            ys.push(y.clone());
        }

        // standard step-size controller
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).min(opts.h_max);
    }
    if t >= t_end {
        complete = true;
    }
    OdeSolution { ts, ys, events: recs, complete }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period_and_events() {
        // y'' = -y, y(0) = 1, y'(0) = 0; zeros of y at odd multiples of pi/2
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let zero = |_t: f64, y: &[f64]| y[0];
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
        let sol = integrate_dp45(&f, 0.0, &[1.0, 0.0], 10.0, &opts, &[&zero]);
        assert!(sol.complete);
        let expected = [
            std::f64::consts::FRAC_PI_2,
            3.0 * std::f64::consts::FRAC_PI_2,
            5.0 * std::f64::consts::FRAC_PI_2,
        ];
        assert!(sol.events.len() >= 3);
        for (rec, exp) in sol.events.iter().zip(expected) {
            assert!((rec.t - exp).abs() < 1e-9, "{} vs {exp}", rec.t);
        }
        // amplitude preserved
        let last = sol.ys.last().unwrap();
        let e = last[0] * last[0] + last[1] * last[1];
        assert!((e - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = -2.0 * y[0];
        };
        let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let sol = integrate_dp45(&f, 0.0, &[3.0], 2.0, &opts, &[]);
        let got = sol.ys.last().unwrap()[0];
        let exact = 3.0 * (-4.0f64).exp();
        assert!(((got - exact) / exact).abs() < 1e-9);
    }
}
