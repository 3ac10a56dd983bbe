//! Higher-order blow-up expansions of the profiles and their residuals.
//!
//! With `ell = log(1/r)` near the origin (or `ell = log r` at infinity for `g`), both
//! `f^{1-m}` and `g^{1-m}` are a known prefactor times the bracket
//!
//! ```text
//! ell + L log ell + C + a3/ell + L^2 log(ell)/ell + o(1/ell)
//! ```
//!
//! where `L = loglog_coeff`, `C` is built from `K0` and the amplitude/speed parameters,
//! and `a3` collects the `1/ell` coefficient. `K0` comes from a numerical `K(1,1)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DerivedConstants;
use crate::profile::{KEstimate, Profile, ProfileRequest};

/// Truncation order of the bracketed series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `ell`
    Leading,
    /// `+ L log ell`
    Loglog,
    /// `+ C`
    Constant,
    /// `+ a3/ell + L^2 log(ell)/ell`
    OneOverLog,
}

impl Order {
    pub const ALL: [Order; 4] = [Order::Leading, Order::Loglog, Order::Constant, Order::OneOverLog];
}

/// Expansion coefficients for one `(eta, beta_tilde)` pair, sourced from `K(1,1)`.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCoefficients {
    #[serde(rename = "K0")]
    pub k0: f64,
    /// Uncertainty of `K0` propagated from the `K(1,1)` error estimate.
    pub k0_error: f64,
    #[serde(rename = "K_11")]
    pub k_11: f64,
    pub k_11_error: f64,
    /// Full `a1`, including the `a2(1,1)` contribution.
    pub a1: f64,
    /// `a2` at `(eta, beta_tilde)`; present when `K(eta, beta_tilde)` is known.
    pub a2_eta_beta: Option<f64>,
    pub a3: f64,
    pub eta: f64,
    pub beta_tilde: f64,
    pub order: Order,
    pub converged: bool,
}

/// `a2(eta, beta_tilde)` evaluated literally from `K(eta, beta_tilde)`.
pub fn a2(c: &DerivedConstants, k: f64, beta_tilde: f64) -> f64 {
    let (n, m, d, e) = (c.n(), c.m(), c.d(), c.e());
    let om = 1.0 - m;
    2.0 * (1.0 - 2.0 * m) * (n - 1.0) * d / (om * om) + (n - 1.0) * e * e / (om * om) - e / om * k * beta_tilde
}

/// Full `a1` from `K(1,1)`.
pub fn a1_full(c: &DerivedConstants, k_11: f64) -> f64 {
    let (n, m, d) = (c.n(), c.m(), c.d());
    c.loglog_coeff * c.loglog_coeff - (1.0 - m).powi(2) * a2(c, k_11, 1.0) / (4.0 * (n - 1.0) * d * d)
}

/// `a3(A, beta_tilde) = a1 + L/gamma1 log(A beta_tilde^{1/(1-m)})`.
pub fn a3(c: &DerivedConstants, a1: f64, amplitude: f64, beta_tilde: f64) -> f64 {
    a1 + c.loglog_coeff / c.gamma1 * (amplitude.ln() + beta_tilde.ln() / (1.0 - c.m()))
}

/// `K0 = (1-m) K(1,1) / (2(n-1)(n-2-nm))`.
pub fn k0_from_k11(c: &DerivedConstants, k_11: f64) -> f64 {
    (1.0 - c.m()) * k_11 / (2.0 * (c.n() - 1.0) * c.d())
}

/// Constant block of the `g` bracket, `K0 + log(eta)/gamma1 + m/(n-2-nm) log(beta_tilde)`.
pub fn g_constant_block(c: &DerivedConstants, k0: f64, eta: f64, beta_tilde: f64) -> f64 {
    k0 + eta.ln() / c.gamma1 + c.m() / c.d() * beta_tilde.ln()
}

/// Constant block implied by a directly measured `K(eta, beta_tilde)`, i.e. `K / farfield_slope`.
pub fn constant_block_from_k(c: &DerivedConstants, k: f64) -> f64 {
    k / c.farfield_slope
}

impl ExpansionCoefficients {
    /// Coefficients at `(1,1)` from a computed `K(1,1)`.
    pub fn from_k11(c: &DerivedConstants, k: &KEstimate) -> Self {
        let scale = (1.0 - c.m()) / (2.0 * (c.n() - 1.0) * c.d());
        let a1 = a1_full(c, k.k);
        Self {
            k0: k0_from_k11(c, k.k),
            k0_error: scale * k.error_estimate,
            k_11: k.k,
            k_11_error: k.error_estimate,
            a1,
            a2_eta_beta: Some(a2(c, k.k, 1.0)),
            a3: a1,
            eta: 1.0,
            beta_tilde: 1.0,
            order: Order::OneOverLog,
            converged: k.converged,
        }
    }

    /// Retarget to `(eta, beta_tilde)`; `k` is `K(eta, beta_tilde)` when it has been computed.
    pub fn at(&self, c: &DerivedConstants, eta: f64, beta_tilde: f64, k: Option<f64>) -> Self {
        Self {
            a2_eta_beta: k.map(|k| a2(c, k, beta_tilde)),
            a3: a3(c, self.a1, eta, beta_tilde),
            eta,
            beta_tilde,
            ..self.clone()
        }
    }

    pub fn with_order(&self, order: Order) -> Self {
        Self { order, ..self.clone() }
    }
}

/// Run the `(eta, beta_tilde) = (1, 1)` profile and derive `K0`, `a1`, `a2(1,1)`, `a3(1,1)`.
pub fn compute_k0(n: u32, m: f64) -> Result<ExpansionCoefficients> {
    compute_k0_with(n, m, 200.0)
}

/// As [`compute_k0`] with an explicit far-field horizon.
pub fn compute_k0_with(n: u32, m: f64, s_max: f64) -> Result<ExpansionCoefficients> {
    let mut req = ProfileRequest::with_beta_tilde(n, m, 1.0, 1.0)?;
    req.s_max = s_max;
    let p = Profile::compute(req)?;
    Ok(ExpansionCoefficients::from_k11(&p.constants, &p.k))
}

/// Bracketed series truncated at `order`.
pub fn bracket(ell: f64, constant: f64, a3: f64, loglog: f64, order: Order) -> f64 {
    let lell = ell.ln();
    let mut v = ell;
    if order >= Order::Loglog {
        v += loglog * lell;
    }
    if order >= Order::Constant {
        v += constant;
    }
    if order >= Order::OneOverLog {
        v += a3 / ell + loglog * loglog * lell / ell;
    }
    v
}

/// Far-field amplitude of `f`, given directly or through `A = lambda^{-gamma1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplitude {
    A(f64),
    Lambda(f64),
}

/// Value of a truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionValue {
    /// The series for the `1-m` power: prefactor times bracket.
    pub power: f64,
    /// The profile value itself, `power^{1/(1-m)}`.
    pub value: f64,
    pub bracket: f64,
}

/// Expansion of `f^{1-m}` near the origin; `c` carries `beta`.
pub fn eval_expansion_f(
    r: f64,
    amplitude: Amplitude,
    coeffs: &ExpansionCoefficients,
    c: &DerivedConstants,
    order: Order,
) -> Result<ExpansionValue> {
    let lim = (-std::f64::consts::E).exp();
    if !(r > 0.0 && r <= lim) {
        return Err(Error::OutOfRange { what: "r", value: r, lo: 0.0, hi: lim });
    }
    let m = c.m();
    let bt = c.beta_tilde;
    // (1/gamma1) log A, which equals -log(lambda) for A = lambda^{-gamma1}.
    let (log_a_term, amp) = match amplitude {
        Amplitude::A(a) => (a.ln() / c.gamma1, a),
        Amplitude::Lambda(l) => (-l.ln(), l.powf(-c.gamma1)),
    };
    if !(amp > 0.0 && amp.is_finite()) {
        return Err(Error::InvalidParams(format!("amplitude > 0 (got {amp})")));
    }
    let a3v = a3(c, coeffs.a1, amp, bt);
    let constant = coeffs.k0 + log_a_term + m / c.d() * c.beta().abs().ln();
    let ell = -r.ln();
    let b = bracket(ell, constant, a3v, c.loglog_coeff, order);
    let power = c.blowup_const / (r * r) * b;
    Ok(ExpansionValue { power, value: power.powf(1.0 / (1.0 - m)), bracket: b })
}

/// Expansion of `g^{1-m}` at infinity for `g = g_{beta_tilde, eta}`; `c` carries `beta_tilde`.
pub fn eval_expansion_g(
    r: f64,
    eta: f64,
    coeffs: &ExpansionCoefficients,
    c: &DerivedConstants,
    order: Order,
) -> Result<ExpansionValue> {
    let e1 = std::f64::consts::E;
    if !(r > e1) || !r.is_finite() {
        return Err(Error::OutOfRange { what: "r", value: r, lo: e1, hi: f64::INFINITY });
    }
    let b = g_bracket(r.ln(), eta, coeffs, c, order);
    let m = c.m();
    let power = c.farfield_slope * (-(c.d() / m) * r.ln()).exp() * b;
    Ok(ExpansionValue { power, value: power.powf(1.0 / (1.0 - m)), bracket: b })
}

fn g_bracket(s: f64, eta: f64, coeffs: &ExpansionCoefficients, c: &DerivedConstants, order: Order) -> f64 {
    let bt = c.beta_tilde;
    let constant = g_constant_block(c, coeffs.k0, eta, bt);
    let a3v = a3(c, coeffs.a1, eta, bt);
    bracket(s, constant, a3v, c.loglog_coeff, order)
}

/// One sample of the residual table.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub s: f64,
    /// `g^{1-m} r^{(n-2-nm)/m} / farfield_slope`, the normalized numeric bracket.
    pub numeric: f64,
    /// Partial sums at each order.
    pub partial: [f64; 4],
    /// `numeric - partial` at each order.
    pub residual: [f64; 4],
}

/// Residuals of the `g` expansion against a computed profile.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub eta: f64,
    pub beta_tilde: f64,
    pub order: Order,
    pub rows: Vec<ResidualRow>,
    /// `Rem_leading(s)/log s` at the last sample and its target `L`.
    pub loglog_ratio: f64,
    pub loglog_target: f64,
    /// Least-squares slope of `s |Rem|` at `order` over the last decade window.
    pub trend_window: (f64, f64),
    pub trend_slope: f64,
    /// True when the slope is negative.
    pub trend_decreasing: bool,
    /// True when `s |Rem|` is strictly decreasing sample by sample over the window.
    pub trend_pointwise: bool,
    /// `a3` from the closed form.
    pub a3: f64,
    /// `a3` fitted from `s Rem_constant - L^2 log s` with basis `{1, log^2 s/s, log s/s, 1/s}`.
    pub a3_fit: f64,
    pub a3_fit_window: (f64, f64),
    pub a3_rel_error: f64,
    /// `a3` with the sign of the `K` term in `a2` reversed, and its relative error.
    pub a3_opposite_sign: f64,
    pub a3_opposite_sign_rel_error: f64,
    /// `s Rem_constant` at the last sample.
    pub s_rem_constant_end: f64,
}

/// Tabulate expansion residuals for `profile`, using `coeffs` from the `(1,1)` run.
///
/// Samples are spaced by `ds` on `[s_fit_lo, s_max]`; the trend is measured on
/// `[s_max/2, s_max]`.
pub fn expansion_residual_report(
    profile: &Profile,
    coeffs: &ExpansionCoefficients,
    order: Order,
    s_fit_lo: f64,
    ds: f64,
) -> Result<ResidualReport> {
    let c = &profile.constants;
    let s_max = profile.s_max();
    let s_lo = s_fit_lo.max(profile.far.s_min()).max(2.0);
    if !(s_lo < s_max && ds > 0.0) {
        return Err(Error::InvalidParams(format!("residual window [{s_lo}, {s_max}] with step {ds}")));
    }
    let eta = profile.eta();
    let bt = c.beta_tilde;
    let co = coeffs.at(c, eta, bt, Some(profile.k.k));
    let big_l = c.loglog_coeff;

    let count = ((s_max - s_lo) / ds).floor() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let s = (s_lo + i as f64 * ds).min(s_max);
        let (h, _) = profile.far.eval_h(s);
        let numeric = s + h / c.a0;
        let mut partial = [0.0; 4];
        let mut residual = [0.0; 4];
        for (k, o) in Order::ALL.iter().enumerate() {
            partial[k] = g_bracket(s, eta, &co, c, *o);
            residual[k] = numeric - partial[k];
        }
        rows.push(ResidualRow { s, numeric, partial, residual });
    }

    let last = rows.last().unwrap();
    let loglog_ratio = last.residual[0] / last.s.ln();

    let oi = order as usize;
    let window = (0.5 * s_max, s_max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.s >= window.0)
        .map(|r| (r.s, r.s * r.residual[oi].abs()))
        .unzip();
    let trend_slope = ls_slope(&xs, &ys);
    let trend_pointwise = ys.windows(2).all(|w| w[1] < w[0]);

    // Fit the 1/s coefficient of the constant-order remainder.
    let ci = Order::Constant as usize;
    let fit_rows: Vec<&ResidualRow> = rows.iter().collect();
    let a = DMatrix::from_fn(fit_rows.len(), 4, |i, j| {
        let s = fit_rows[i].s;
        let ls = s.ln();
        match j {
            0 => 1.0,
            1 => ls * ls / s,
            2 => ls / s,
            _ => 1.0 / s,
        }
    });
    let b = DVector::from_iterator(
        fit_rows.len(),
        fit_rows.iter().map(|r| r.s * r.residual[ci] - big_l * big_l * r.s.ln()),
    );
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Mismatch(format!("least squares failed: {e}")))?;
    let a3_fit = sol[0];
    let rel = |x: f64| (a3_fit - x).abs() / x.abs().max(1e-300);

    // Opposite sign of the K term in a2(1,1).
    let a1_alt = big_l * big_l
        - (1.0 - c.m()).powi(2) * a2(c, -coeffs.k_11, 1.0) / (4.0 * (c.n() - 1.0) * c.d() * c.d());
    let a3_alt = a3(c, a1_alt, eta, bt);

    Ok(ResidualReport {
        eta,
        beta_tilde: bt,
        order,
        loglog_ratio,
        loglog_target: big_l,
        trend_window: window,
        trend_slope,
        trend_decreasing: trend_slope < 0.0,
        trend_pointwise,
        a3: co.a3,
        a3_fit,
        a3_fit_window: (s_lo, s_max),
        a3_rel_error: rel(co.a3),
        a3_opposite_sign: a3_alt,
        a3_opposite_sign_rel_error: rel(a3_alt),
        s_rem_constant_end: last.s * last.residual[ci],
        rows,
    })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Profile-difference law near the origin.
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceReport {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Asymptotic constant of `D(r)`.
    pub target: f64,
    /// `(r, D(r))` samples.
    pub samples: Vec<(f64, f64)>,
    pub max_rel_deviation: f64,
    pub all_positive: bool,
}

/// `D(r) = (f_{l2} - f_{l1}) r^{2/(1-m)} (log 1/r)^{-m/(1-m)}` on log-spaced `r` in `[r_lo, r_hi]`.
///
/// `profile1` must have `eta = 1`.
pub fn difference_constant_check(
    profile1: &Profile,
    lambda1: f64,
    lambda2: f64,
    r_lo: f64,
    r_hi: f64,
    count: usize,
) -> Result<DifferenceReport> {
    if !(lambda1 >= lambda2 && lambda2 > 0.0) {
        return Err(Error::InvalidParams(format!("lambda1 >= lambda2 > 0 (got {lambda1}, {lambda2})")));
    }
    if !(0.0 < r_lo && r_lo < r_hi && r_hi < 1.0 && count >= 2) {
        return Err(Error::InvalidParams(format!("0 < r_lo < r_hi < 1 (got {r_lo}, {r_hi})")));
    }
    let c = &profile1.constants;
    let m = c.m();
    let om = 1.0 - m;
    let target = 2.0 * (c.n() - 1.0) * c.d() / (om * om * c.beta().abs())
        * c.blowup_const.powf(m / om)
        * (lambda1 / lambda2).ln();
    let mut samples = Vec::with_capacity(count);
    let mut max_rel = 0.0f64;
    let mut all_positive = true;
    for i in 0..count {
        let x = r_lo.ln() + (r_hi.ln() - r_lo.ln()) * i as f64 / (count - 1) as f64;
        let (l2, _) = profile1.eval_f_lambda_log(lambda2, x)?;
        let (l1, _) = profile1.eval_f_lambda_log(lambda1, x)?;
        // f_{l2} - f_{l1} = f_{l2} (1 - e^{l1 - l2}), scaled in log form.
        let ell = -x;
        let scale = l2 + 2.0 / om * x - m / om * ell.ln();
        let dv = scale.exp() * -(l1 - l2).exp_m1();
        all_positive &= dv > 0.0;
        if lambda1 != lambda2 {
            max_rel = max_rel.max((dv / target - 1.0).abs());
        }
        samples.push((x.exp(), dv));
    }
    Ok(DifferenceReport { lambda1, lambda2, target, samples, max_rel_deviation: max_rel, all_positive })
}
