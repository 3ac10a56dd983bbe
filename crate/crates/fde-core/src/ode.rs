//! Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//!
//! Accepted steps are reported to a callback, which stores whatever the caller
//! needs and may stop the integration early.

/// Step control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h0: f64,
    pub max_steps: usize,
    pub h_min: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h0: 1e-6, max_steps: 10_000_000, h_min: 1e-300 }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    Stopped { t: f64 },
    StepSizeCollapse { t: f64 },
    NonFinite { t: f64 },
    TooManySteps { t: f64 },
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for i in 0..D {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrate `y' = f(t, y)` from `t0` to `t_end`.
///
/// `h_max(t)` caps the step at each position. `on_step(t, y, dy)` is called at the
/// initial point and after every accepted step; returning `false` stops early.
pub fn integrate<const D: usize, F, H, C>(
    mut f: F,
    t0: f64,
    y0: [f64; D],
    t_end: f64,
    ctrl: StepControl,
    h_max: H,
    mut on_step: C,
) -> Outcome
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
    H: Fn(f64) -> f64,
    C: FnMut(f64, &[f64; D], &[f64; D]) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    if !on_step(t, &y, &k1) {
        return Outcome::Stopped { t };
    }
    let mut h = ctrl.h0.min(h_max(t)).min(t_end - t);
    let mut steps = 0usize;
    let mut last_rejected = false;

    while t < t_end {
        if steps >= ctrl.max_steps {
            return Outcome::TooManySteps { t };
        }
        steps += 1;
        let remaining = t_end - t;
        let mut last = false;
        h = h.min(h_max(t));
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < ctrl.h_min || h <= t.abs() * f64::EPSILON * 4.0 {
            return Outcome::StepSizeCollapse { t };
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0f64;
        let mut finite = true;
        for i in 0..D {
            let ei = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = ctrl.atol + ctrl.rtol * y[i].abs().max(y_new[i].abs());
            let r = ei / sc;
            if !r.is_finite() || !y_new[i].is_finite() {
                finite = false;
            }
            err = err.max(r.abs());
        }

        if !finite {
            h *= 0.25;
            last_rejected = true;
            if h < ctrl.h_min {
                return Outcome::NonFinite { t };
            }
            continue;
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            k1 = k7;
            if !on_step(t, &y, &k1) {
                return Outcome::Stopped { t };
            }
            let mut fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
            fac = fac.clamp(0.2, 5.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h *= fac;
            last_rejected = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            last_rejected = true;
        }
    }
    Outcome::Completed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut end = [0.0];
        let ctrl = StepControl { rtol: 1e-12, atol: 1e-14, h0: 1e-3, ..Default::default() };
        let out = integrate(
            |_, y: &[f64; 1]| [-y[0]],
            0.0,
            [1.0],
            5.0,
            ctrl,
            |_| f64::INFINITY,
            |_, y, _| {
                end = *y;
                true
            },
        );
        assert_eq!(out, Outcome::Completed);
        assert!((end[0] - (-5.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_fifth_order() {
        // Global error at fixed tolerance should track tol; check it is small.
        let mut y_end = [0.0; 2];
        let ctrl = StepControl { rtol: 1e-11, atol: 1e-13, h0: 1e-2, ..Default::default() };
        integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            ctrl,
            |_| 0.5,
            |_, y, _| {
                y_end = *y;
                true
            },
        );
        assert!((y_end[0] - 10f64.sin()).abs() < 1e-9);
        assert!((y_end[1] - 10f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn callback_can_stop() {
        let out = integrate(
            |_, _y: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            StepControl::default(),
            |_| 0.1,
            |t, _, _| t < 1.0,
        );
        assert!(matches!(out, Outcome::Stopped { t } if t >= 1.0));
    }

    #[test]
    fn blowup_is_reported() {
        // y' = y^2, y(0)=1 blows up at t=1.
        let out = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            StepControl { max_steps: 100_000, ..Default::default() },
            |_| f64::INFINITY,
            |_, _, _| true,
        );
        assert!(!matches!(out, Outcome::Completed));
    }
}
