//! Self-similar profiles.
//!
//! The inverted profile `g(r) = r^{-(n-2)/m} f(1/r)` is regular at the origin with
//! `g(0) = eta`. It is started from a power series in `t = r^theta`, integrated in
//! `(g, g_r)` up to `r_switch`, and then continued in `s = log r` through
//! `w~ = r^{(1-m) kappa} g^{1-m}`, which grows linearly in `s`. The far field is
//! integrated in `h = w~ - a0 s` so that the slowly varying remainder is never
//! obtained by subtracting two large numbers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::ode::{self, Outcome, StepControl};
use crate::params::{derive_constants, DerivedConstants, ModelParams};

/// Number of series terms used at startup.
const SERIES_TERMS: usize = 12;
/// Relative step cap in the inner region, as a fraction of `r`.
const INNER_REL_STEP: f64 = 0.02;
/// Step cap in the far field, in units of `s`.
const FAR_STEP: f64 = 0.05;

/// Inputs of a profile computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRequest {
    pub params: ModelParams,
    pub eta: f64,
    pub r0: f64,
    pub r_switch: f64,
    pub s_max: f64,
    pub tol: f64,
}

impl ProfileRequest {
    pub fn new(params: ModelParams, eta: f64) -> Self {
        Self { params, eta, r0: 1e-6, r_switch: 10.0, s_max: 200.0, tol: 1e-10 }
    }

    /// Request with `beta = -beta_tilde`.
    pub fn with_beta_tilde(n: u32, m: f64, beta_tilde: f64, eta: f64) -> Result<Self> {
        Ok(Self::new(ModelParams::new(n, m, -beta_tilde)?, eta))
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta > 0 (got {})", self.eta)));
        }
        if !(self.r0 > 0.0 && self.r0 < self.r_switch) {
            return Err(Error::InvalidParams("0 < r0 < r_switch".into()));
        }
        if !(self.s_max > self.r_switch.ln()) {
            return Err(Error::InvalidParams("s_max > log(r_switch)".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParams("tol > 0".into()));
        }
        Ok(())
    }
}

/// Power series of `g` in `t = r^theta` near the origin.
#[derive(Debug, Clone, Serialize)]
pub struct LocalSeries {
    pub theta: f64,
    /// Coefficients of `g`.
    pub coeffs: Vec<f64>,
    /// Limit of `r^{delta1} g_r(r)` as `r -> 0`.
    pub c_loc: f64,
}

impl LocalSeries {
    /// Series with `terms` coefficients for `g(0) = eta`.
    pub fn new(c: &DerivedConstants, eta: f64, terms: usize) -> Self {
        let m = c.m();
        let n = c.n();
        let th = c.theta();
        let bt = c.beta_tilde;
        let shift = -2.0 * m * bt / (1.0 - m);
        let pw = 1.0 / m;
        // v = g^m and g = v^{1/m}, both as series in t.
        let mut v = vec![0.0; terms];
        let mut g = vec![0.0; terms];
        v[0] = eta.powf(m);
        g[0] = eta;
        for k in 0..terms - 1 {
            let kk = (k + 1) as f64;
            v[k + 1] = -(m / (n - 1.0)) * g[k] * (shift / (n - 2.0 + kk * th) + bt) / (th * kk);
            let mut acc = 0.0;
            for j in 1..=k + 1 {
                let jj = j as f64;
                acc += (pw * jj - kk + jj) * v[j] * g[k + 1 - j];
            }
            g[k + 1] = acc / (kk * v[0]);
        }
        let c_loc = -m * c.alpha_tilde * eta.powf(2.0 - m) / ((n - 1.0) * (n - 2.0 - 2.0 * m));
        Self { theta: th, coeffs: g, c_loc }
    }

    /// `(g, g_r)` at `r`, summing all stored terms.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        if r == 0.0 {
            let d = if self.theta > 1.0 { 0.0 } else if self.theta == 1.0 { self.coeffs[1] } else { f64::NEG_INFINITY };
            return (self.coeffs[0], d);
        }
        let t = r.powf(self.theta);
        let mut g = 0.0;
        let mut dg = 0.0;
        let mut tk = 1.0;
        for (k, ck) in self.coeffs.iter().enumerate() {
            g += ck * tk;
            if k > 0 {
                dg += ck * k as f64 * tk;
            }
            tk *= t;
        }
        (g, dg * self.theta / r)
    }

    /// Magnitude of the last stored term at `r`, used as a truncation estimate.
    pub fn truncation(&self, r: f64) -> f64 {
        let k = self.coeffs.len() - 1;
        (self.coeffs[k] * r.powf(self.theta * k as f64)).abs()
    }

    /// The first-order startup values `eta + C_loc r^theta / theta` and `C_loc r^{-delta1}`.
    pub fn first_order(&self, r: f64) -> (f64, f64) {
        let th = self.theta;
        (self.coeffs[0] + self.c_loc * r.powf(th) / th, self.c_loc * r.powf(th - 1.0))
    }
}

/// Startup values at `r0` with the series truncation checked against `tol`.
pub fn local_series_start(req: &ProfileRequest) -> Result<(f64, f64)> {
    req.validate()?;
    let c = derive_constants(req.params)?;
    let series = LocalSeries::new(&c, req.eta, SERIES_TERMS + 1);
    check_series(&series, req)?;
    Ok(series.eval(req.r0))
}

fn check_series(series: &LocalSeries, req: &ProfileRequest) -> Result<()> {
    let truncation = series.truncation(req.r0);
    if !(truncation <= req.tol * req.eta) {
        return Err(Error::StartupRadius { r0: req.r0, truncation, tol: req.tol });
    }
    Ok(())
}

/// The solution on `[r0, r_switch]`.
#[derive(Debug, Clone, Serialize)]
pub struct InnerProfile {
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub g_r: Vec<f64>,
    pub g_rr: Vec<f64>,
    pub series: LocalSeries,
    #[serde(skip)]
    interp_g: Option<Hermite>,
    #[serde(skip)]
    interp_gr: Option<Hermite>,
}

/// Second derivative of `g` from the inverted profile equation.
fn inner_rhs(c: &DerivedConstants, r: f64, g: f64, gr: f64) -> f64 {
    let m = c.m();
    let n = c.n();
    let p = c.theta() - 2.0;
    -(m - 1.0) * gr * gr / g
        - (n - 1.0) * gr / r
        - r.powf(p) * g.powf(1.0 - m) * (c.alpha_tilde * g + c.beta_tilde * r * gr) / (n - 1.0)
}

pub fn integrate_inner(req: &ProfileRequest) -> Result<InnerProfile> {
    req.validate()?;
    let c = derive_constants(req.params)?;
    let series = LocalSeries::new(&c, req.eta, SERIES_TERMS + 1);
    check_series(&series, req)?;
    let y0 = series.eval(req.r0);

    let mut r = Vec::new();
    let mut g = Vec::new();
    let mut g_r = Vec::new();
    let mut g_rr = Vec::new();
    let mut bad: Option<(f64, String)> = None;

    let ctrl = StepControl { rtol: req.tol, atol: 1e-300, h0: req.r0 * 1e-3, ..Default::default() };
    let out = ode::integrate(
        |t, y: &[f64; 2]| [y[1], inner_rhs(&c, t, y[0], y[1])],
        req.r0,
        [y0.0, y0.1],
        req.r_switch,
        ctrl,
        |t| INNER_REL_STEP * t,
        |t, y, dy| {
            if !(y[0] > 0.0) || !y[0].is_finite() {
                bad = Some((t, format!("g = {} is not positive", y[0])));
                return false;
            }
            r.push(t);
            g.push(y[0]);
            g_r.push(y[1]);
            g_rr.push(dy[1]);
            true
        },
    );
    if let Some((t, reason)) = bad {
        return Err(Error::Integration { r: t, reason });
    }
    match out {
        Outcome::Completed => {}
        other => {
            return Err(Error::Integration { r: *r.last().unwrap_or(&req.r0), reason: format!("{other:?}") })
        }
    }
    let mut inner = InnerProfile { r, g, g_r, g_rr, series, interp_g: None, interp_gr: None };
    inner.build_interp();
    Ok(inner)
}

impl InnerProfile {
    fn build_interp(&mut self) {
        // Interpolate in x = log r, where d/dx = r d/dr.
        let x: Vec<f64> = self.r.iter().map(|v| v.ln()).collect();
        let dg: Vec<f64> = self.r.iter().zip(&self.g_r).map(|(r, d)| r * d).collect();
        let dgr: Vec<f64> = self.r.iter().zip(&self.g_rr).map(|(r, d)| r * d).collect();
        self.interp_g = Some(Hermite::new(x.clone(), self.g.clone(), dg));
        self.interp_gr = Some(Hermite::new(x, self.g_r.clone(), dgr));
    }

    /// `(g, g_r)` for `r` within the stored grid.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let x = r.ln();
        let g = self.interp_g.as_ref().unwrap().eval(x).0;
        let gr = self.interp_gr.as_ref().unwrap().eval(x).0;
        (g, gr)
    }
}

/// The far-field solution in `s = log r`.
#[derive(Debug, Clone, Serialize)]
pub struct FarFieldTrace {
    pub s: Vec<f64>,
    pub w: Vec<f64>,
    pub w_s: Vec<f64>,
    pub h: Vec<f64>,
    /// `h - h1_slope log s`; absent in the Yamabe case.
    pub h1: Option<Vec<f64>>,
    pub h_s: Vec<f64>,
    pub h_ss: Vec<f64>,
    #[serde(skip)]
    interp_h: Option<Hermite>,
    #[serde(skip)]
    interp_hs: Option<Hermite>,
}

/// `h_ss` from the equation for `w~` written in terms of `h = w~ - a0 s`.
fn far_rhs(c: &DerivedConstants, s: f64, h: f64, hs: f64) -> f64 {
    let m = c.m();
    let w = h + c.a0 * s;
    let ws = hs + c.a0;
    (1.0 - 2.0 * m) / (1.0 - m) * ws * ws / w - c.b0 * ws - c.beta_tilde / (c.n() - 1.0) * w * hs
}

/// The individual terms of the `w~` equation, for residual scaling.
fn far_terms(c: &DerivedConstants, s: f64, h: f64, hs: f64) -> [f64; 3] {
    let m = c.m();
    let w = h + c.a0 * s;
    let ws = hs + c.a0;
    [
        (1.0 - 2.0 * m) / (1.0 - m) * ws * ws / w,
        c.b0 * ws,
        c.beta_tilde / (c.n() - 1.0) * w * hs,
    ]
}

pub fn integrate_far_field(req: &ProfileRequest, inner: &InnerProfile) -> Result<FarFieldTrace> {
    let c = derive_constants(req.params)?;
    let m = c.m();
    let kappa = c.kappa();
    let rs = *inner.r.last().unwrap();
    let gs = *inner.g.last().unwrap();
    let grs = *inner.g_r.last().unwrap();
    let s0 = rs.ln();
    let w0 = (rs.powf(kappa) * gs).powf(1.0 - m);
    let ws0 = (1.0 - m) * w0 * (kappa + rs * grs / gs);
    if !(ws0 > 0.0) {
        return Err(Error::Invariant { name: "w_s > 0", coordinate: "s", at: s0 });
    }

    let mut s = Vec::new();
    let mut h = Vec::new();
    let mut h_s = Vec::new();
    let mut h_ss = Vec::new();
    let mut bad_at: Option<f64> = None;
    let ctrl = StepControl { rtol: req.tol, atol: req.tol, h0: 1e-3, ..Default::default() };
    let out = ode::integrate(
        |t, y: &[f64; 2]| [y[1], far_rhs(&c, t, y[0], y[1])],
        s0,
        [w0 - c.a0 * s0, ws0 - c.a0],
        req.s_max,
        ctrl,
        |_| FAR_STEP,
        |t, y, dy| {
            if !(y[1] + c.a0 > 0.0) || !(y[0] + c.a0 * t > 0.0) {
                bad_at = Some(t);
                return false;
            }
            s.push(t);
            h.push(y[0]);
            h_s.push(y[1]);
            h_ss.push(dy[1]);
            true
        },
    );
    if let Some(t) = bad_at {
        return Err(Error::Invariant { name: "w > 0 and w_s > 0", coordinate: "s", at: t });
    }
    if out != Outcome::Completed {
        return Err(Error::Integration { r: s.last().copied().unwrap_or(s0).exp(), reason: format!("{out:?}") });
    }

    let w: Vec<f64> = s.iter().zip(&h).map(|(s, h)| h + c.a0 * s).collect();
    let w_s: Vec<f64> = h_s.iter().map(|v| v + c.a0).collect();
    let h1 = if c.yamabe_case {
        None
    } else {
        Some(s.iter().zip(&h).map(|(s, h)| h - c.h1_slope * s.ln()).collect())
    };
    let mut trace = FarFieldTrace { s, w, w_s, h, h1, h_s, h_ss, interp_h: None, interp_hs: None };
    trace.build_interp();
    Ok(trace)
}

impl FarFieldTrace {
    fn build_interp(&mut self) {
        self.interp_h = Some(Hermite::new(self.s.clone(), self.h.clone(), self.h_s.clone()));
        self.interp_hs = Some(Hermite::new(self.s.clone(), self.h_s.clone(), self.h_ss.clone()));
    }

    pub fn s_min(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    /// `(h, h_s)` at `s`.
    pub fn eval_h(&self, s: f64) -> (f64, f64) {
        (self.interp_h.as_ref().unwrap().eval(s).0, self.interp_hs.as_ref().unwrap().eval(s).0)
    }
}

/// Tail correction used to extract `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KMethod {
    /// `h1 - T (1 + log s)/s`.
    FirstOrderTail,
    /// First-order tail plus the `1/s` term, solved self-consistently for `K`.
    SecondOrderTail,
    /// Yamabe case: `h + (n-1)(1-2m)/((1-m) beta_tilde) / s`.
    YamabeTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KEstimate {
    #[serde(rename = "K")]
    pub k: f64,
    pub error_estimate: f64,
    pub method: KMethod,
    pub converged: bool,
}

/// `1/s` coefficient of `h1` that does not depend on `K`.
fn tail_a0(c: &DerivedConstants) -> f64 {
    let m = c.m();
    let n = c.n();
    let d = c.d();
    let e = c.e();
    let p = 2.0 * (1.0 - 2.0 * m) * (n - 1.0) * d / ((1.0 - m) * (1.0 - m)) + (n - 1.0) * e * e / ((1.0 - m) * (1.0 - m));
    (1.0 - m) * p / (2.0 * d * c.beta_tilde)
}

/// Tail-corrected estimate of `K` from `h` at a single `s`.
pub fn k_hat(c: &DerivedConstants, method: KMethod, s: f64, h: f64) -> f64 {
    let ls = s.ln();
    match method {
        KMethod::YamabeTail => {
            let y = (c.n() - 1.0) * (1.0 - 2.0 * c.m()) / ((1.0 - c.m()) * c.beta_tilde);
            h + y / s
        }
        KMethod::FirstOrderTail => h - c.h1_slope * ls - c.h1_tail_coeff * (1.0 + ls) / s,
        KMethod::SecondOrderTail => {
            let h1 = h - c.h1_slope * ls;
            (h1 - c.h1_tail_coeff * (1.0 + ls) / s + tail_a0(c) / s) / (1.0 + c.loglog_coeff / s)
        }
    }
}

/// Default method for the given constants.
pub fn default_k_method(c: &DerivedConstants) -> KMethod {
    if c.yamabe_case {
        KMethod::YamabeTail
    } else {
        KMethod::SecondOrderTail
    }
}

pub fn estimate_k(trace: &FarFieldTrace, c: &DerivedConstants) -> KEstimate {
    estimate_k_with(trace, c, default_k_method(c))
}

pub fn estimate_k_with(trace: &FarFieldTrace, c: &DerivedConstants, method: KMethod) -> KEstimate {
    let s1 = trace.s_max();
    let s2 = 0.5 * s1;
    let k1 = k_hat(c, method, s1, trace.eval_h(s1).0);
    let k2 = if s2 >= trace.s_min() { k_hat(c, method, s2, trace.eval_h(s2).0) } else { f64::NAN };
    let error_estimate = (k1 - k2).abs();
    let converged = k1.is_finite() && error_estimate <= 1e-2 * (1.0 + k1.abs());
    KEstimate { k: k1, error_estimate, method, converged }
}

/// A complete profile.
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub request: ProfileRequest,
    pub constants: DerivedConstants,
    pub inner: InnerProfile,
    pub far: FarFieldTrace,
    pub k: KEstimate,
}

impl Profile {
    pub fn compute(req: ProfileRequest) -> Result<Self> {
        req.validate()?;
        let constants = derive_constants(req.params)?;
        let inner = integrate_inner(&req)?;
        let far = integrate_far_field(&req, &inner)?;
        let k = estimate_k(&far, &constants);
        Ok(Self { request: req, constants, inner, far, k })
    }

    pub fn eta(&self) -> f64 {
        self.request.eta
    }

    /// Largest radius at which `g` can be evaluated.
    pub fn s_max(&self) -> f64 {
        self.far.s_max()
    }

    /// `(log g, r g_r / g)` at `s = log r`, valid for all `s <= s_max`.
    pub fn eval_g_log(&self, s: f64) -> Result<(f64, f64)> {
        let c = &self.constants;
        if s > self.far.s_max() * (1.0 + 1e-15) {
            return Err(Error::OutOfRange { what: "log r", value: s, lo: f64::NEG_INFINITY, hi: self.far.s_max() });
        }
        if s > self.far.s_min() {
            let (h, hs) = self.far.eval_h(s.min(self.far.s_max()));
            let w = h + c.a0 * s;
            let ws = hs + c.a0;
            let m = c.m();
            let lg = w.ln() / (1.0 - m) - c.kappa() * s;
            let dlog = ws / ((1.0 - m) * w) - c.kappa();
            return Ok((lg, dlog));
        }
        let r = s.exp();
        let (g, gr) = self.eval_g(r)?;
        Ok((g.ln(), r * gr / g))
    }

    /// `(g, g_r)` at `r`.
    pub fn eval_g(&self, r: f64) -> Result<(f64, f64)> {
        if !(r >= 0.0) {
            return Err(Error::OutOfRange { what: "r", value: r, lo: 0.0, hi: self.far.s_max().exp() });
        }
        let r0 = self.inner.r[0];
        let rs = *self.inner.r.last().unwrap();
        if r <= r0 {
            return Ok(self.inner.series.eval(r));
        }
        if r <= rs {
            return Ok(self.inner.eval(r));
        }
        let s = r.ln();
        let (lg, dlog) = self.eval_g_log(s)?;
        let g = lg.exp();
        Ok((g, g * dlog / r))
    }

    /// `(log f, r f_r / f)` at `log r = x`.
    pub fn eval_f_log(&self, x: f64) -> Result<(f64, f64)> {
        let c = &self.constants;
        let q = (c.n() - 2.0) / c.m();
        let (lg, dlog) = self.eval_g_log(-x).map_err(|_| Error::OutOfRange {
            what: "log r",
            value: x,
            lo: -self.far.s_max(),
            hi: f64::INFINITY,
        })?;
        Ok((-q * x + lg, -q - dlog))
    }

    /// `(f, f_r)` at `r`.
    pub fn eval_f(&self, r: f64) -> Result<(f64, f64)> {
        if !(r > 0.0) {
            return Err(Error::OutOfRange { what: "r", value: r, lo: 0.0, hi: f64::INFINITY });
        }
        let (lf, dlog) = self.eval_f_log(r.ln())?;
        let f = lf.exp();
        Ok((f, f * dlog / r))
    }

    /// `(log f_lambda, r f_lambda' / f_lambda)` at `log r = x`; meaningful when `eta = 1`.
    pub fn eval_f_lambda_log(&self, lambda: f64, x: f64) -> Result<(f64, f64)> {
        let (lf, dlog) = self.eval_f_log(x + lambda.ln())?;
        Ok((self.constants.lambda_exponent() * lambda.ln() + lf, dlog))
    }

    /// `f_lambda(r) = lambda^{2/(1-m)} f_1(lambda r)`.
    pub fn eval_f_lambda(&self, lambda: f64, r: f64) -> Result<f64> {
        check_lambda(lambda)?;
        Ok(self.eval_f_lambda_log(lambda, r.ln())?.0.exp())
    }

    /// `U_lambda(r, t) = e^{-alpha t} f_lambda(e^{-beta t} r)`.
    pub fn eval_u_lambda(&self, lambda: f64, r: f64, t: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let c = &self.constants;
        let (lf, _) = self.eval_f_lambda_log(lambda, r.ln() - c.beta() * t)?;
        Ok((lf - c.alpha * t).exp())
    }

    /// `g_lambda(r) = r^{-(n-2)/m} f_lambda(1/r) = lambda^{2/(1-m)-(n-2)/m} g_1(r/lambda)`.
    pub fn eval_g_lambda(&self, lambda: f64, r: f64) -> Result<f64> {
        check_lambda(lambda)?;
        let c = &self.constants;
        let q = (c.n() - 2.0) / c.m();
        let (lg, _) = self.eval_g_log(r.ln() - lambda.ln())?;
        Ok(((c.lambda_exponent() - q) * lambda.ln() + lg).exp())
    }

    /// `Ubar_lambda(r, t) = e^{-alpha~ t} g_lambda(e^{-beta~ t} r)`.
    pub fn eval_u_bar_lambda(&self, lambda: f64, r: f64, t: f64) -> Result<f64> {
        let c = &self.constants;
        Ok((-c.alpha_tilde * t).exp() * self.eval_g_lambda(lambda, (-c.beta_tilde * t).exp() * r)?)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("lambda > 0 (got {lambda})")))
    }
}

/// Node-wise invariant checks and residuals of a profile.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub g_positive: bool,
    pub g_monotone_expression_positive: bool,
    pub w_s_positive: bool,
    pub flux_decreasing: bool,
    pub inner_residual_max: f64,
    pub far_residual_max: f64,
    /// Largest `r w_r / w` over the inner grid.
    pub rw_r_over_w_max: f64,
    pub min_g_monotone_expression: f64,
}

impl InvariantReport {
    pub fn all_pass(&self, residual_tol: f64) -> bool {
        self.g_positive
            && self.g_monotone_expression_positive
            && self.w_s_positive
            && self.flux_decreasing
            && self.inner_residual_max <= residual_tol
            && self.far_residual_max <= residual_tol
    }
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

pub fn check_invariants(p: &Profile) -> InvariantReport {
    let c = &p.constants;
    let m = c.m();
    let n = c.n();
    let inner = &p.inner;
    let ratio = c.beta_tilde / c.alpha_tilde;

    let g_positive = inner.g.iter().all(|&g| g > 0.0);
    let mut min_expr = f64::INFINITY;
    for i in 0..inner.r.len() {
        let e = (inner.g[i] + ratio * inner.r[i] * inner.g_r[i]) / inner.g[i];
        min_expr = min_expr.min(e);
    }

    let flux = |r: f64, g: f64, gr: f64| r.powf(n - 1.0) * m * g.powf(m - 1.0) * gr;
    let mut flux_decreasing = true;
    let mut inner_res: f64 = 0.0;
    let p_exp = c.theta() - 2.0;
    for i in 0..inner.r.len() - 1 {
        let (ra, rb) = (inner.r[i], inner.r[i + 1]);
        let fa = flux(ra, inner.g[i], inner.g_r[i]);
        let fb = flux(rb, inner.g[i + 1], inner.g_r[i + 1]);
        if fb - fa > 1e-12 * fa.abs() {
            flux_decreasing = false;
        }
        // Integrated form: F(rb) - F(ra) + (m/(n-1)) int r^{n-1+p} (alpha~ g + beta~ r g_r) dr = 0.
        let (xa, xb) = (ra.ln(), rb.ln());
        let mut integral = 0.0;
        for (z, wgt) in GL5 {
            let x = 0.5 * (xa + xb) + 0.5 * (xb - xa) * z;
            let r = x.exp();
            let (g, gr) = inner.eval(r);
            let src = r.powf(n - 1.0 + p_exp) * (c.alpha_tilde * g + c.beta_tilde * r * gr) * r;
            integral += wgt * 0.5 * (xb - xa) * src;
        }
        integral *= m / (n - 1.0);
        let scale = fa.abs().max(fb.abs()).max(integral.abs());
        let rr = (fb - fa + integral).abs() / scale;
        inner_res = inner_res.max(rr);
    }

    let rw = inner
        .r
        .iter()
        .zip(inner.g.iter().zip(&inner.g_r))
        .map(|(r, (g, gr))| (1.0 - m) * (c.kappa() + r * gr / g))
        .fold(f64::NEG_INFINITY, f64::max);

    let far = &p.far;
    let w_s_positive = far.w_s.iter().all(|&v| v > 0.0) && far.w.iter().all(|&v| v > 0.0);
    let mut far_res: f64 = 0.0;
    for i in 0..far.s.len() - 1 {
        let (sa, sb) = (far.s[i], far.s[i + 1]);
        let mut integral = 0.0;
        let mut term_scale: f64 = 0.0;
        for (z, wgt) in GL5 {
            let s = 0.5 * (sa + sb) + 0.5 * (sb - sa) * z;
            let (h, hs) = far.eval_h(s);
            integral += wgt * 0.5 * (sb - sa) * far_rhs(c, s, h, hs);
            for t in far_terms(c, s, h, hs) {
                term_scale = term_scale.max(t.abs() * (sb - sa));
            }
        }
        let scale = far.w_s[i].abs().max(far.w_s[i + 1].abs()).max(term_scale);
        let rr = (far.h_s[i + 1] - far.h_s[i] - integral).abs() / scale;
        far_res = far_res.max(rr);
    }

    InvariantReport {
        g_positive,
        g_monotone_expression_positive: min_expr > 0.0,
        w_s_positive,
        flux_decreasing,
        inner_residual_max: inner_res,
        far_residual_max: far_res,
        rw_r_over_w_max: rw,
        min_g_monotone_expression: min_expr,
    }
}

/// Growth-limit diagnostics at the far-field horizon.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthLimits {
    pub s_max: f64,
    /// `w~_s(s_max) / farfield_slope - 1`.
    pub w_s_rel: f64,
    /// `w~(s_max) / (s_max farfield_slope) - 1`.
    pub w_over_s_rel: f64,
    /// `r^2 f^{1-m} / log(1/r)` at `r = e^{-s_max}`, relative to `blowup_const`, minus 1.
    pub blowup_rel: f64,
    /// `r^{(n-2)/m} f(r) / eta - 1` at `r = e^{20}`.
    pub amplitude_rel: f64,
}

pub fn growth_limits(p: &Profile) -> Result<GrowthLimits> {
    let c = &p.constants;
    let s = p.far.s_max();
    let last = p.far.s.len() - 1;
    let w_s_rel = p.far.w_s[last] / c.farfield_slope - 1.0;
    let w_over_s_rel = p.far.w[last] / (s * c.farfield_slope) - 1.0;
    let (lf, _) = p.eval_f_log(-s)?;
    // r^2 f^{1-m} at r = e^{-s}, in log form.
    let blow = ((1.0 - c.m()) * lf - 2.0 * s).exp() / s;
    let blowup_rel = blow / c.blowup_const - 1.0;
    let x = 20.0;
    let (lf, _) = p.eval_f_log(x)?;
    let amplitude_rel = ((c.n() - 2.0) / c.m() * x + lf).exp() / p.eta() - 1.0;
    Ok(GrowthLimits { s_max: s, w_s_rel, w_over_s_rel, blowup_rel, amplitude_rel })
}

/// Maximum relative deviations of the four scaling identities.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub samples: usize,
    /// `f_{b1,A1}(r) = (A2/A1)^{2/((1-m) gamma1)} f_{b1,A2}((A2/A1)^{1/gamma1} r)`.
    pub f_amplitude: f64,
    /// `f_{b1,(b2/b1)^{1/(1-m)} A1} = (b2/b1)^{1/(1-m)} f_{b2,A1}`.
    pub f_beta: f64,
    /// `g_{b1,e1}(r) = (e1/e2) g_{b1,e2}((e1/e2)^{m(1-m)/(n-2-nm)} r)`.
    pub g_amplitude: f64,
    /// `g_{b1,(b2/b1)^{1/(1-m)} e1} = (b2/b1)^{1/(1-m)} g_{b2,e1}`.
    pub g_beta: f64,
}

impl ScalingReport {
    pub fn max(&self) -> f64 {
        self.f_amplitude.max(self.f_beta).max(self.g_amplitude).max(self.g_beta)
    }
}

/// Evaluate the four scaling identities on `samples` log-spaced radii.
///
/// The `g` identities are sampled on `[1e-3, e^{s_hi}]` and the `f` identities on the
/// mirrored range, so both the inner grid and the far field are exercised.
pub fn check_scaling_identities(
    n: u32,
    m: f64,
    eta1: f64,
    eta2: f64,
    beta_tilde1: f64,
    beta_tilde2: f64,
    base: ProfileRequest,
    samples: usize,
) -> Result<ScalingReport> {
    let mk = |bt: f64, eta: f64| -> Result<Profile> {
        let mut req = base;
        req.params = ModelParams::new(n, m, -bt)?;
        req.eta = eta;
        Profile::compute(req)
    };
    let p11 = mk(beta_tilde1, eta1)?;
    let p12 = mk(beta_tilde1, eta2)?;
    let bratio = (beta_tilde2 / beta_tilde1).powf(1.0 / (1.0 - m));
    let pb1 = mk(beta_tilde1, bratio * eta1)?;
    let pb2 = mk(beta_tilde2, eta1)?;

    let c = &p11.constants;
    let gamma1 = c.gamma1;
    let s_lo = (1e-3f64).ln();
    // Keep every scaled argument inside the computed range.
    let arg_shift = ((eta1 / eta2).ln() * m * (1.0 - m) / c.d()).abs();
    let s_hi = (p11.s_max().min(p12.s_max()).min(pb1.s_max()).min(pb2.s_max()) - arg_shift - 1.0).min(60.0);
    let xs: Vec<f64> = (0..samples).map(|i| s_lo + (s_hi - s_lo) * i as f64 / (samples - 1) as f64).collect();

    let mut rep = ScalingReport { samples, f_amplitude: 0.0, f_beta: 0.0, g_amplitude: 0.0, g_beta: 0.0 };
    let rel = |a: f64, b: f64| (a - b).abs().max(0.0);
    for &x in &xs {
        // g identities, compared in log form.
        let k = eta1 / eta2;
        let lhs = p11.eval_g_log(x)?.0;
        let rhs = k.ln() + p12.eval_g_log(x + k.ln() * m * (1.0 - m) / c.d())?.0;
        rep.g_amplitude = rep.g_amplitude.max(rel(lhs, rhs));
        let lhs = pb1.eval_g_log(x)?.0;
        let rhs = bratio.ln() + pb2.eval_g_log(x)?.0;
        rep.g_beta = rep.g_beta.max(rel(lhs, rhs));

        // f identities at log r = -x.
        let a_ratio = eta2 / eta1;
        let lhs = p11.eval_f_log(-x)?.0;
        let rhs = 2.0 / ((1.0 - m) * gamma1) * a_ratio.ln() + p12.eval_f_log(-x + a_ratio.ln() / gamma1)?.0;
        rep.f_amplitude = rep.f_amplitude.max(rel(lhs, rhs));
        let lhs = pb1.eval_f_log(-x)?.0;
        let rhs = bratio.ln() + pb2.eval_f_log(-x)?.0;
        rep.f_beta = rep.f_beta.max(rel(lhs, rhs));
    }
    // Differences of logarithms are relative deviations to first order.
    for v in [&mut rep.f_amplitude, &mut rep.f_beta, &mut rep.g_amplitude, &mut rep.g_beta] {
        *v = v.exp_m1();
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(n: u32, m: f64, bt: f64, eta: f64) -> ProfileRequest {
        ProfileRequest::with_beta_tilde(n, m, bt, eta).unwrap()
    }

    #[test]
    fn series_leading_coefficient_matches_c_loc() {
        let r = req(3, 0.2, 1.0, 1.0);
        let c = derive_constants(r.params).unwrap();
        let s = LocalSeries::new(&c, 1.0, 8);
        // g_r r^{delta1} -> C_loc as r -> 0.
        for &r0 in &[1e-3, 1e-4] {
            let (_, gr) = s.eval(r0);
            let ratio = gr * r0.powf(c.delta1) / s.c_loc;
            assert!((ratio - 1.0).abs() < 1e-5, "ratio {ratio}");
        }
        assert!((s.coeffs[1] * c.theta() - s.c_loc).abs() < 1e-14 * s.c_loc.abs());
    }

    #[test]
    fn series_solves_the_equation() {
        // The series must satisfy the ODE to truncation order at a small radius.
        let r = req(3, 0.25, 1.0, 1.3);
        let c = derive_constants(r.params).unwrap();
        let s = LocalSeries::new(&c, 1.3, 14);
        let x = 0.05;
        let (g, gr) = s.eval(x);
        let h = 1e-4 * x;
        let (_, grp) = s.eval(x + h);
        let (_, grm) = s.eval(x - h);
        let grr_fd = (grp - grm) / (2.0 * h);
        let grr = inner_rhs(&c, x, g, gr);
        assert!((grr_fd - grr).abs() < 1e-6 * grr.abs(), "{grr_fd} vs {grr}");
    }

    #[test]
    fn series_case_b_derivative_diverges() {
        let r = req(3, 0.3, 1.0, 1.0);
        let c = derive_constants(r.params).unwrap();
        assert!((c.delta1 - 2.0 / 3.0).abs() < 1e-12);
        let s = LocalSeries::new(&c, 1.0, 10);
        let (g1, d1) = s.eval(1e-6);
        let (g2, d2) = s.eval(1e-8);
        assert!(d2.abs() > d1.abs() * 10.0);
        // g - eta ~ c1 r^{1/3}
        assert!((g1 - 1.0).abs() < 0.011 * s.coeffs[1].abs());
        assert!((g2 - 1.0).abs() < (g1 - 1.0).abs());
    }

    #[test]
    fn startup_radius_too_large_is_rejected() {
        let mut r = req(3, 0.3, 1.0, 1.0);
        r.r0 = 0.5;
        assert!(matches!(local_series_start(&r), Err(Error::StartupRadius { .. })));
    }

    #[test]
    fn tiny_eta_does_not_crash() {
        let r = req(3, 0.2, 1.0, 1e-8);
        let (g0, _) = local_series_start(&r).unwrap();
        assert!((g0 / 1e-8 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn inner_profile_decreasing_and_positive() {
        let inner = integrate_inner(&req(3, 0.2, 1.0, 1.0)).unwrap();
        assert!(inner.g.iter().all(|&g| g > 0.0));
        assert!(inner.g.windows(2).all(|w| w[1] < w[0]));
        assert!(*inner.g.last().unwrap() < 1.0);
    }

    #[test]
    fn far_field_examples() {
        let p = Profile::compute(req(3, 0.2, 1.0, 1.0)).unwrap();
        let last = *p.far.w_s.last().unwrap();
        assert!((last / 2.0 - 1.0).abs() < 0.01);
        // Yamabe case: s^2 h_s -> (n-1)(1-2m)/((1-m) beta~) = 1.5.
        let s = 200.0;
        let (_, hs) = p.far.eval_h(s);
        assert!((s * s * hs / 1.5 - 1.0).abs() < 0.05, "{}", s * s * hs);

        let p = Profile::compute(req(3, 0.25, 1.0, 1.0)).unwrap();
        let (h, _) = p.far.eval_h(200.0);
        let slope = (h - p.k.k) / 200f64.ln();
        assert!((slope + 2.0 / 3.0).abs() < 0.02, "{slope}");
    }

    #[test]
    fn k_hat_cauchy_sequence() {
        let p = Profile::compute(req(3, 0.25, 1.0, 1.0)).unwrap();
        let c = &p.constants;
        let kh = |s: f64| k_hat(c, KMethod::SecondOrderTail, s, p.far.eval_h(s).0);
        let d1 = (kh(50.0) - kh(25.0)).abs();
        let d2 = (kh(100.0) - kh(50.0)).abs();
        let d3 = (kh(200.0) - kh(100.0)).abs();
        assert!(d2 < d1 && d3 < d2, "{d1} {d2} {d3}");
    }

    #[test]
    fn k_consistency_across_horizons() {
        let mut r = req(3, 0.2, 1.0, 1.0);
        let p200 = Profile::compute(r).unwrap();
        r.s_max = 100.0;
        let p100 = Profile::compute(r).unwrap();
        assert!(p200.k.error_estimate <= 1e-3 * (1.0 + p200.k.k.abs()));
        assert!((p200.k.k - p100.k.k).abs() <= p200.k.error_estimate.max(p100.k.error_estimate) * 1.01);
    }

    #[test]
    fn handoff_is_continuous() {
        let p = Profile::compute(req(3, 0.25, 1.0, 1.0)).unwrap();
        let rs = p.request.r_switch;
        let (g_in, gr_in) = p.inner.eval(rs);
        let (lg, dlog) = p.eval_g_log(rs.ln() + 1e-12).unwrap();
        assert!((lg.exp() / g_in - 1.0).abs() < 1e-9);
        assert!((dlog.exp() - (rs * gr_in / g_in).exp()).abs() < 1e-8);
    }

    #[test]
    fn eval_limits() {
        let p = Profile::compute(req(3, 0.2, 1.0, 1.0)).unwrap();
        assert_eq!(p.eval_g(0.0).unwrap().0, 1.0);
        assert!(p.eval_g(1e95).is_err());
        // |r g_r| <= g near the origin.
        for (r, (g, gr)) in p.inner.r.iter().zip(p.inner.g.iter().zip(&p.inner.g_r)) {
            if *r < 0.5 {
                assert!((r * gr).abs() <= *g);
            }
        }
        let c = p.constants;
        let (_, d0) = p.eval_f_log(-150.0).unwrap();
        assert!((d0 + 2.0 / (1.0 - c.m())).abs() < 0.05);
        let (_, d1) = p.eval_f_log(15.0).unwrap();
        assert!((d1 + (c.n() - 2.0) / c.m()).abs() < 1e-6);
    }

    #[test]
    fn u_lambda_identities() {
        let p = Profile::compute(req(3, 0.25, 1.0, 1.0)).unwrap();
        let c = p.constants;
        for &(lambda, r, t) in &[(1.0, 0.3, 0.0), (2.0, 1.7, 0.4), (0.5, 20.0, 1.3), (1.5, 0.01, 2.0)] {
            let u0 = p.eval_u_lambda(lambda, r, 0.0).unwrap();
            assert!((u0 / p.eval_f_lambda(lambda, r).unwrap() - 1.0).abs() < 1e-14);
            let (t1, t2) = (0.3 * t, 0.7 * t);
            let a = p.eval_u_lambda(lambda, r, t1 + t2).unwrap();
            let b = (-c.alpha * t1).exp() * p.eval_u_lambda(lambda, (-c.beta() * t1).exp() * r, t2).unwrap();
            assert!((a / b - 1.0).abs() < 1e-10);
            let ub = p.eval_u_bar_lambda(lambda, r, t).unwrap();
            let via = r.powf(-(c.n() - 2.0) / c.m()) * p.eval_u_lambda(lambda, 1.0 / r, t).unwrap();
            assert!((ub / via - 1.0).abs() < 1e-10, "{ub} {via}");
        }
    }

    #[test]
    fn f_lambda_monotone_in_lambda() {
        let p = Profile::compute(req(3, 0.2, 1.0, 1.0)).unwrap();
        for k in 0..40 {
            let r = (-10.0 + 0.5 * k as f64).exp();
            assert!(p.eval_f_lambda(2.0, r).unwrap() < p.eval_f_lambda(1.0, r).unwrap());
        }
        let c = p.constants;
        let lam: f64 = 2.0;
        let r: f64 = 1e6;
        let v = r.powf((c.n() - 2.0) / c.m()) * p.eval_f_lambda(lam, r).unwrap();
        assert!((v / lam.powf(c.lambda_exponent() - (c.n() - 2.0) / c.m()) - 1.0).abs() < 1e-8);
    }
}
