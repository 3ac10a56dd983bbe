//! Backward Euler with Newton iteration for the radial equation on an annulus.
//!
//! In `s = log r` the radial Laplacian is `e^{-ns} d/ds (e^{(n-2)s} d/ds)`, discretized
//! in flux form with the flux weights taken at half nodes. The rescaled form adds
//! `alpha u + beta r u_r = beta e^{-ks} d/ds (e^{ks} u)` with `k = alpha/beta = 2/(1-m)`.

use serde::{Deserialize, Serialize};

use super::grid::AnnulusGrid;
use crate::error::{Error, Result};
use crate::params::DerivedConstants;

/// Which equation is being advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Physical,
    Rescaled,
}

/// Discretization of the rescaled transport term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advection {
    /// `alpha u_i + beta (u_i - u_{i-1})/ds`.
    Upwind,
    /// `beta (u_i - e^{-k ds} u_{i-1})/ds`: upwind on `e^{ks} u`, exact on `r^{-k}`.
    FittedUpwind,
    /// `beta (e^{k ds} u_{i+1} - e^{-k ds} u_{i-1})/(2 ds)`: centered on `e^{ks} u`, second order.
    #[default]
    FittedCentral,
}

/// Newton settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonSettings {
    /// Convergence when `max |dU_i| / U_i` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 50 }
    }
}

/// Precomputed operator for one grid, parameter set and form.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub form: Form,
    m: f64,
    /// Coupling of node `i` to `i-1` and `i+1` in `(L phi)_i`.
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Rescaled transport: `c0 U_i + c1 U_{i-1} + c2 U_{i+1}`.
    c0: f64,
    c1: f64,
    c2: f64,
    pub newton: NewtonSettings,
    // Scratch space.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    f: Vec<f64>,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

/// Result of one accepted implicit step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub iterations: usize,
    pub damped: bool,
}

impl Stepper {
    pub fn new(grid: &AnnulusGrid, c: &DerivedConstants, form: Form, advection: Advection, newton: NewtonSettings) -> Self {
        let n = c.n();
        let ds = grid.ds;
        let dcoef = c.diffusivity() / (ds * ds);
        let len = grid.len();
        let mut lo = vec![0.0; len];
        let mut hi = vec![0.0; len];
        for i in 1..len - 1 {
            let si = grid.s[i];
            let sm = 0.5 * (grid.s[i - 1] + si);
            let sp = 0.5 * (si + grid.s[i + 1]);
            lo[i] = dcoef * ((n - 2.0) * sm - n * si).exp();
            hi[i] = dcoef * ((n - 2.0) * sp - n * si).exp();
        }
        let k = c.alpha / c.beta();
        let (c0, c1, c2) = match (form, advection) {
            (Form::Physical, _) => (0.0, 0.0, 0.0),
            (Form::Rescaled, Advection::Upwind) => (c.alpha + c.beta() / ds, -c.beta() / ds, 0.0),
            (Form::Rescaled, Advection::FittedUpwind) => (c.beta() / ds, -c.beta() * (-k * ds).exp() / ds, 0.0),
            (Form::Rescaled, Advection::FittedCentral) => {
                let h = c.beta() / (2.0 * ds);
                (0.0, -h * (-k * ds).exp(), h * (k * ds).exp())
            }
        };
        Self {
            form,
            m: c.m(),
            lo,
            hi,
            c0,
            c1,
            c2,
            newton,
            a: vec![0.0; len],
            b: vec![0.0; len],
            c: vec![0.0; len],
            f: vec![0.0; len],
            phi: vec![0.0; len],
            dphi: vec![0.0; len],
        }
    }

    /// Spatial operator `(L u^m)_i` plus transport, at interior nodes (zero at the ends).
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let len = u.len();
        let phi: Vec<f64> = u.iter().map(|v| v.powf(self.m)).collect();
        let mut out = vec![0.0; len];
        for i in 1..len - 1 {
            out[i] = self.hi[i] * (phi[i + 1] - phi[i]) - self.lo[i] * (phi[i] - phi[i - 1])
                + self.c0 * u[i]
                + self.c1 * u[i - 1]
                + self.c2 * u[i + 1];
        }
        out
    }

    /// Diffusion part only, applied to an arbitrary node function.
    pub fn laplacian(&self, phi: &[f64]) -> Vec<f64> {
        let len = phi.len();
        let mut out = vec![0.0; len];
        for i in 1..len - 1 {
            out[i] = self.hi[i] * (phi[i + 1] - phi[i]) - self.lo[i] * (phi[i] - phi[i - 1]);
        }
        out
    }

    /// One backward Euler step of size `dt` from `u_old`, with Dirichlet values
    /// `(left, right)` at the new time. `u` holds the initial guess and receives the result.
    pub fn step(&mut self, u_old: &[f64], u: &mut [f64], dt: f64, left: f64, right: f64, t: f64) -> Result<StepInfo> {
        let len = u_old.len();
        if !(left > 0.0 && right > 0.0) {
            return Err(Error::Solver { t, reason: format!("non-positive boundary data ({left}, {right})") });
        }
        u[0] = left;
        u[len - 1] = right;
        let m = self.m;
        let mut damped = false;
        for it in 1..=self.newton.max_iter {
            for i in 0..len {
                let p = u[i].powf(m);
                self.phi[i] = p;
                self.dphi[i] = m * p / u[i];
            }
            for i in 1..len - 1 {
                let (lo, hi) = (self.lo[i], self.hi[i]);
                let lap = hi * (self.phi[i + 1] - self.phi[i]) - lo * (self.phi[i] - self.phi[i - 1]);
                let tr = self.c0 * u[i] + self.c1 * u[i - 1] + self.c2 * u[i + 1];
                self.f[i] = u[i] - u_old[i] - dt * (lap + tr);
                self.a[i] = if i > 1 { -dt * (lo * self.dphi[i - 1] + self.c1) } else { 0.0 };
                self.b[i] = 1.0 + dt * ((lo + hi) * self.dphi[i] - self.c0);
                self.c[i] = if i < len - 2 { -dt * (hi * self.dphi[i + 1] + self.c2) } else { 0.0 };
                self.f[i] = -self.f[i];
            }
            thomas(&self.a[1..len - 1], &mut self.b[1..len - 1], &self.c[1..len - 1], &mut self.f[1..len - 1]);
            // Halve the update until every node stays positive.
            let mut lambda = 1.0;
            let mut halvings = 0;
            while (1..len - 1).any(|i| u[i] + lambda * self.f[i] <= 0.0) {
                lambda *= 0.5;
                halvings += 1;
                damped = true;
                if halvings > 60 {
                    return Err(Error::Solver { t, reason: "positivity damping exhausted".into() });
                }
            }
            let mut upd = 0.0f64;
            for i in 1..len - 1 {
                let d = lambda * self.f[i];
                upd = upd.max((d / u[i]).abs());
                u[i] += d;
            }
            if !upd.is_finite() {
                return Err(Error::Solver { t, reason: "non-finite Newton update".into() });
            }
            if upd <= self.newton.tol && lambda == 1.0 {
                return Ok(StepInfo { iterations: it, damped });
            }
        }
        Err(Error::Solver { t, reason: format!("Newton did not converge in {} iterations", self.newton.max_iter) })
    }
}

/// Solve a tridiagonal system in place: `a` sub-, `b` main, `c` super-diagonal; `d` becomes the solution.
pub fn thomas(a: &[f64], b: &mut [f64], c: &[f64], d: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        let w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    d[n - 1] /= b[n - 1];
    for i in (0..n - 1).rev() {
        d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_constants, ModelParams};

    #[test]
    fn thomas_solves_small_system() {
        // [2 1 0; 1 3 1; 0 1 4] x = [3, 5, 5] -> x = [1, 1, 1]
        let a = [0.0, 1.0, 1.0];
        let mut b = [2.0, 3.0, 4.0];
        let c = [1.0, 1.0, 0.0];
        let mut d = [3.0, 5.0, 5.0];
        thomas(&a, &mut b, &c, &mut d);
        for x in d {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_state_is_stationary() {
        let c = derive_constants(ModelParams::new(3, 0.2, -1.0).unwrap()).unwrap();
        let g = AnnulusGrid::uniform(10.0, 41).unwrap();
        let mut st = Stepper::new(&g, &c, Form::Physical, Advection::default(), NewtonSettings::default());
        let u0 = vec![2.5; 41];
        let mut u = u0.clone();
        st.step(&u0, &mut u, 0.1, 2.5, 2.5, 0.1).unwrap();
        for v in u {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn fundamental_harmonic_is_discrete_harmonic() {
        // r^{2-n} is annihilated exactly by the flux stencil.
        let c = derive_constants(ModelParams::new(4, 0.3, -1.0).unwrap()).unwrap();
        let g = AnnulusGrid::uniform(5.0, 33).unwrap();
        let st = Stepper::new(&g, &c, Form::Physical, Advection::default(), NewtonSettings::default());
        let phi: Vec<f64> = g.s.iter().map(|s| (-2.0 * s).exp()).collect();
        let lap = st.laplacian(&phi);
        for i in 1..32 {
            let scale = (st.hi[i] + st.lo[i]) * phi[i];
            assert!(lap[i].abs() < 1e-12 * scale, "node {i}: {}", lap[i]);
        }
    }

    #[test]
    fn fitted_transport_is_exact_on_power() {
        let c = derive_constants(ModelParams::new(3, 0.25, -0.7).unwrap()).unwrap();
        let g = AnnulusGrid::uniform(4.0, 21).unwrap();
        let k = 2.0 / (1.0 - c.m());
        let u: Vec<f64> = g.s.iter().map(|s| (-k * s).exp()).collect();
        for adv in [Advection::FittedUpwind, Advection::FittedCentral] {
            let st = Stepper::new(&g, &c, Form::Rescaled, adv, NewtonSettings::default());
            for i in 1..20 {
                let tr = st.c0 * u[i] + st.c1 * u[i - 1] + st.c2 * u[i + 1];
                assert!(tr.abs() < 1e-12 * u[i], "{adv:?}: {tr}");
            }
        }
    }
}
