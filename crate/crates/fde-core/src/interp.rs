//! Piecewise cubic Hermite interpolation with a monotonicity guard.
//!
//! Node derivatives come from the ODE right-hand side, so the interpolant is
//! fourth-order accurate. When the supplied slopes would let a monotone segment
//! overshoot, they are scaled back onto the Fritsch-Carlson circle.

/// Cubic Hermite interpolant on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// Build from nodes, values and slopes. Slopes are limited in place where needed.
    pub fn new(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d.len());
        for i in 0..x.len() - 1 {
            let h = x[i + 1] - x[i];
            assert!(h > 0.0, "grid must be strictly increasing");
            let delta = (y[i + 1] - y[i]) / h;
            if delta == 0.0 {
                continue;
            }
            let a = d[i] / delta;
            let b = d[i + 1] / delta;
            // Only monotone segments are limited; slopes of opposite sign mark a
            // genuine extremum and are kept as supplied.
            if a <= 0.0 || b <= 0.0 {
                continue;
            }
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                d[i] = tau * a * delta;
                d[i + 1] = tau * b * delta;
            }
        }
        Self { x, y, d }
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.x.len() - 2),
        }
    }

    /// Value and derivative at `t`; `t` must lie in `[lo, hi]`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (y0, y1, d0, d1) = (self.y[i], self.y[i + 1], self.d[i] * h, self.d[i + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let v = h00 * y0 + h10 * d0 + h01 * y1 + h11 * d1;
        let dh00 = 6.0 * u2 - 6.0 * u;
        let dh10 = 3.0 * u2 - 4.0 * u + 1.0;
        let dh01 = -6.0 * u2 + 6.0 * u;
        let dh11 = 3.0 * u2 - 2.0 * u;
        let dv = (dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1) / h;
        (v, dv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics() {
        let f = |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x * x * x;
        let df = |x: f64| 2.0 - 2.0 * x + 1.5 * x * x;
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.3).collect();
        let y = x.iter().map(|&t| f(t)).collect();
        let d = x.iter().map(|&t| df(t)).collect();
        // Not monotone on every segment, so the limiter must leave it untouched here.
        let h = Hermite::new(x, y, d);
        for k in 0..50 {
            let t = k as f64 * 1.5 / 49.0;
            let (v, dv) = h.eval(t);
            assert!((v - f(t)).abs() < 1e-13);
            assert!((dv - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_on_smooth_data() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
            let y = x.iter().map(|t| t.exp()).collect();
            let d = x.iter().map(|t| t.exp()).collect();
            let h = Hermite::new(x, y, d);
            (0..997).map(|k| {
                let t = k as f64 / 996.0;
                (h.eval(t).0 - t.exp()).abs()
            })
            .fold(0.0, f64::max)
        };
        let rate = (err(10) / err(20)).log2();
        assert!(rate > 3.7 && rate < 4.3, "rate {rate}");
    }

    #[test]
    fn limiter_prevents_overshoot() {
        let x = vec![0.0, 1.0, 2.0];
        let y = vec![0.0, 1.0, 1.0 + 1e-3];
        let d = vec![5.0, 5.0, 5.0];
        let h = Hermite::new(x, y, d);
        for k in 0..=200 {
            let t = 2.0 * k as f64 / 200.0;
            let (v, _) = h.eval(t);
            assert!(v >= -1e-15 && v <= 1.0 + 1e-3 + 1e-15);
        }
    }
}
