//! Weighted L¹ norms, contraction reports and convergence reports.
//!
//! Norms are radial: `‖h‖ = ω_n ∫ |h| w r^{n-1} dr`, computed by the trapezoid rule in
//! `s = log r` on the annulus grid, where the integrand becomes `|h| w r^n`.
//! Every verdict concerns the annulus problem with matched Dirichlet data, which is
//! the approximation used to construct solutions, not the problem on the punctured space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{AnnulusGrid, Form, Trajectory};
use crate::params::{validate_regime, DerivedConstants};
use crate::profile::Profile;

/// Header attached to every report.
pub const ANNULUS_NOTE: &str =
    "verdicts concern the annulus approximation with matched Dirichlet data, not the problem on the punctured space";

/// Surface area of the unit sphere in `R^n`.
pub fn omega_n(n: u32) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI * omega_n(n - 2) / (n - 2) as f64,
    }
}

/// Weight families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// `|x|^{-mu}`, `0 < mu <= mu1`.
    PowerMu { mu: f64 },
    /// `f_{lambda3}^{m gamma}`; `gamma` defaults to `gamma2`.
    ProfileGamma2 {
        lambda3: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
    },
    /// `|x|^{(n-2)/m + (n-2) gamma3 - 2n} f_{lambda3}^{m gamma3}`.
    RadialGamma3 { lambda3: f64 },
    /// `|x|^{power} f_{lambda3}^{exponent}`, outside the certified families.
    CustomPowerTimesProfile { power: f64, lambda3: f64, exponent: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} > 0 (got {v})")))
    }
}

impl WeightSpec {
    /// Enforce the parameter ranges under which each family carries a contraction statement.
    pub fn validate(&self, c: &DerivedConstants) -> Result<()> {
        let reject = |flag: crate::params::RegimeFlag| match flag.applies {
            true => Ok(()),
            false => Err(Error::InvalidParams(flag.violated.unwrap_or_default())),
        };
        match *self {
            WeightSpec::PowerMu { mu } => {
                positive("mu", mu)?;
                let report = validate_regime(c, Some(self.snapped_mu(c).unwrap_or(mu)));
                reject(report.thm13_mu_range.expect("mu supplied"))
            }
            WeightSpec::ProfileGamma2 { lambda3, gamma } => {
                positive("lambda3", lambda3)?;
                if let Some(g) = gamma {
                    positive("gamma", g)?;
                }
                reject(validate_regime(c, None).thm15_16)
            }
            WeightSpec::RadialGamma3 { lambda3 } => {
                positive("lambda3", lambda3)?;
                reject(validate_regime(c, None).thm17)
            }
            WeightSpec::CustomPowerTimesProfile { power, lambda3, exponent } => {
                positive("lambda3", lambda3)?;
                if power.is_finite() && exponent.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams("finite power and exponent".into()))
                }
            }
        }
    }

    /// `mu`, snapped onto `mu1` when it agrees to rounding.
    fn snapped_mu(&self, c: &DerivedConstants) -> Option<f64> {
        match *self {
            WeightSpec::PowerMu { mu } if (mu - c.mu1).abs() <= 1e-12 * c.mu1 => Some(c.mu1),
            WeightSpec::PowerMu { mu } => Some(mu),
            _ => None,
        }
    }

    /// `(power of r, lambda3, exponent of f_{lambda3})`.
    fn factors(&self, c: &DerivedConstants) -> (f64, Option<f64>, f64) {
        let (n, m) = (c.n(), c.m());
        match *self {
            WeightSpec::PowerMu { mu } => (-mu, None, 0.0),
            WeightSpec::ProfileGamma2 { lambda3, gamma } => (0.0, Some(lambda3), m * gamma.unwrap_or(c.gamma2)),
            WeightSpec::RadialGamma3 { lambda3 } => {
                ((n - 2.0) / m + (n - 2.0) * c.gamma3 - 2.0 * n, Some(lambda3), m * c.gamma3)
            }
            WeightSpec::CustomPowerTimesProfile { power, lambda3, exponent } => (power, Some(lambda3), exponent),
        }
    }

    /// Whether the weight transported to rescaled variables is `w` with `lambda3 -> e^{-beta t} lambda3`
    /// and no extra exponential factor.
    pub fn has_rescaled_variant(&self, c: &DerivedConstants) -> bool {
        match *self {
            WeightSpec::ProfileGamma2 { gamma, .. } => gamma.map_or(true, |g| (g - c.gamma2).abs() <= 1e-12 * c.gamma2),
            WeightSpec::RadialGamma3 { .. } => true,
            _ => false,
        }
    }

    /// Nodal weight values; `lambda_scale` multiplies `lambda3`.
    pub fn values(&self, profile: &Profile, grid: &AnnulusGrid, lambda_scale: f64) -> Result<Vec<f64>> {
        let c = &profile.constants;
        let (power, lambda3, exponent) = self.factors(c);
        let w: Vec<f64> = match lambda3 {
            None => grid.r_pow(power),
            Some(l) => {
                let l = l * lambda_scale;
                grid.s
                    .iter()
                    .map(|&s| Ok((power * s + exponent * profile.eval_f_lambda_log(l, s)?.0).exp()))
                    .collect::<Result<_>>()?
            }
        };
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Invariant { name: "weight positivity", coordinate: "r", at: grid.r[i] });
        }
        Ok(w)
    }
}

/// `ω_n ∫ h r^n ds` by the trapezoid rule, for nodal `h`.
pub fn radial_integral(h: &[f64], grid: &AnnulusGrid, n: u32) -> Result<f64> {
    if h.len() != grid.len() {
        return Err(Error::Mismatch(format!("field has {} nodes, grid has {}", h.len(), grid.len())));
    }
    let nf = n as f64;
    let k = h.len();
    let mut sum = 0.0;
    for (i, (&v, &s)) in h.iter().zip(&grid.s).enumerate() {
        let term = v * (nf * s).exp();
        sum += if i == 0 || i == k - 1 { 0.5 * term } else { term };
    }
    Ok(omega_n(n) * sum * grid.ds)
}

/// `‖a - b‖_{L¹(w)}` with nodal weight values.
pub fn weighted_l1(a: &[f64], b: &[f64], weight: &[f64], grid: &AnnulusGrid, n: u32) -> Result<f64> {
    if a.len() != b.len() || a.len() != weight.len() {
        return Err(Error::Mismatch("fields and weight must share the grid".into()));
    }
    let h: Vec<f64> = a.iter().zip(b).zip(weight).map(|((x, y), w)| (x - y).abs() * w).collect();
    radial_integral(&h, grid, n)
}

/// `‖(a - b)_+‖_{L¹(w)}`.
pub fn weighted_l1_positive(a: &[f64], b: &[f64], weight: &[f64], grid: &AnnulusGrid, n: u32) -> Result<f64> {
    if a.len() != b.len() || a.len() != weight.len() {
        return Err(Error::Mismatch("fields and weight must share the grid".into()));
    }
    let h: Vec<f64> = a.iter().zip(b).zip(weight).map(|((x, y), w)| (x - y).max(0.0) * w).collect();
    radial_integral(&h, grid, n)
}

/// Report verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Absolute tolerance on per-step increments, relative to the initial distance.
pub const CONTRACTION_TOL: f64 = 1e-8;

/// Multiplier applied to the half-resolution norm shift.
pub const SLACK_FACTOR: f64 = 10.0;

/// Rescaled-variable series and its time-inflated bound.
#[derive(Debug, Clone, Serialize)]
pub struct RescaledVariant {
    /// `‖ũ1 - ũ2‖_{L¹(w_{lambda3})}(t)`.
    pub series: Vec<f64>,
    /// `‖u0,1 - u0,2‖_{L¹(w_{e^{-beta t} lambda3})}`.
    pub bound: Vec<f64>,
    /// `max (series - bound)`.
    pub max_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub note: &'static str,
    pub weight: WeightSpec,
    pub times: Vec<f64>,
    pub series: Vec<f64>,
    pub positive_part: Vec<f64>,
    /// Largest single-step increase of either series.
    pub max_increase: f64,
    /// `CONTRACTION_TOL` times the initial distance.
    pub tolerance: f64,
    /// Ten times the largest shift of the series against a half-resolution rerun.
    pub discretization_slack: Option<f64>,
    pub slack: f64,
    pub rescaled: Option<RescaledVariant>,
    /// `None` when the runs do not share boundary data.
    pub verdict: Option<Verdict>,
    pub reason: Option<String>,
}

fn same_schedule(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::Mismatch("trajectories live on different grids".into()));
    }
    if a.form != b.form || a.params != b.params {
        return Err(Error::Mismatch("trajectories solve different problems".into()));
    }
    let (ta, tb) = (a.times(), b.times());
    if ta.len() != tb.len() || ta.iter().zip(&tb).any(|(x, y)| (x - y).abs() > 1e-12 * (1.0 + x.abs())) {
        return Err(Error::Mismatch("trajectories have different snapshot times".into()));
    }
    Ok(())
}

fn distance_series(a: &Trajectory, b: &Trajectory, weight: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = a.params.n;
    let mut full = Vec::with_capacity(a.snapshots.len());
    let mut plus = Vec::with_capacity(a.snapshots.len());
    for (x, y) in a.snapshots.iter().zip(&b.snapshots) {
        full.push(weighted_l1(&x.u, &y.u, weight, &a.grid, n)?);
        plus.push(weighted_l1_positive(&x.u, &y.u, weight, &a.grid, n)?);
    }
    Ok((full, plus))
}

fn max_increase(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

/// Contraction of `‖u1 - u2‖_{L¹(w)}` along two physical runs.
///
/// `coarse` is the same pair rerun at half resolution; it sets the discretization slack
/// used to tell INCONCLUSIVE from FAIL. `rescaled` requests the time-inflated bound on
/// the rescaled distance, available for the profile weights with exponent `m gamma2`
/// and for the radial `gamma3` weight.
pub fn contraction_report(
    traj1: &Trajectory,
    traj2: &Trajectory,
    weight: WeightSpec,
    profile: &Profile,
    coarse: Option<(&Trajectory, &Trajectory)>,
    rescaled: bool,
) -> Result<ContractionReport> {
    same_schedule(traj1, traj2)?;
    if traj1.form != Form::Physical {
        return Err(Error::Mismatch("contraction is stated for physical runs".into()));
    }
    let c = &profile.constants;
    weight.validate(c)?;
    let w = weight.values(profile, &traj1.grid, 1.0)?;
    let (series, positive_part) = distance_series(traj1, traj2, &w)?;
    let times = traj1.times();
    let n0 = series.first().copied().unwrap_or(0.0);
    let tolerance = CONTRACTION_TOL * n0.max(f64::MIN_POSITIVE);
    let inc = max_increase(&series).max(max_increase(&positive_part));

    let discretization_slack = match coarse {
        None => None,
        Some((c1, c2)) => {
            same_schedule(c1, c2)?;
            let wc = weight.values(profile, &c1.grid, 1.0)?;
            let (sc, _) = distance_series(c1, c2, &wc)?;
            let tc = c1.times();
            let mut shift = 0.0f64;
            for (t, v) in tc.iter().zip(&sc) {
                if let Some(k) = times.iter().position(|x| (x - t).abs() <= 1e-12 * (1.0 + t.abs())) {
                    shift = shift.max((series[k] - v).abs());
                }
            }
            Some(SLACK_FACTOR * shift)
        }
    };
    let slack = tolerance + discretization_slack.unwrap_or(0.0);

    let rescaled = if rescaled {
        if !weight.has_rescaled_variant(c) {
            return Err(Error::Mismatch("the rescaled variant needs a profile weight with gamma2 or the gamma3 weight".into()));
        }
        let first = &traj1.snapshots[0].u;
        let second = &traj2.snapshots[0].u;
        let mut s = Vec::with_capacity(times.len());
        let mut b = Vec::with_capacity(times.len());
        for (k, &t) in times.iter().enumerate() {
            let wt = weight.values(profile, &traj1.grid, (-c.beta() * t).exp())?;
            s.push(weighted_l1(&traj1.snapshots[k].u, &traj2.snapshots[k].u, &wt, &traj1.grid, c.params.n)?);
            b.push(weighted_l1(first, second, &wt, &traj1.grid, c.params.n)?);
        }
        let max_excess = s.iter().zip(&b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max);
        Some(RescaledVariant { series: s, bound: b, max_excess })
    } else {
        None
    };

    let (verdict, reason) = if traj1.boundary != traj2.boundary {
        (None, Some("runs have different boundary data; contraction does not apply".to_string()))
    } else {
        let excess = rescaled.as_ref().map_or(f64::NEG_INFINITY, |r| r.max_excess);
        let worst = inc.max(excess);
        let v = if worst <= tolerance {
            Verdict::Pass
        } else if worst <= slack {
            Verdict::Inconclusive
        } else {
            Verdict::Fail
        };
        (Some(v), None)
    };

    Ok(ContractionReport {
        note: ANNULUS_NOTE,
        weight,
        times,
        series,
        positive_part,
        max_increase: inc,
        tolerance,
        discretization_slack,
        slack,
        rescaled,
        verdict,
        reason,
    })
}

/// Convergence test settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSettings {
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub weight: WeightSpec,
    /// Radial interval `K`.
    #[serde(default = "default_compact")]
    pub compact: [f64; 2],
    /// Required decrease of both errors between the first and last snapshot.
    #[serde(default = "default_factor")]
    pub factor: f64,
    /// Final `e_inf` must not exceed this multiple of `max_K f_{lambda0}`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_compact() -> [f64; 2] {
    [0.5, 2.0]
}

fn default_factor() -> f64 {
    10.0
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub note: &'static str,
    pub settings: ConvergenceSettings,
    pub times: Vec<f64>,
    pub e1: Vec<f64>,
    pub e_inf: Vec<f64>,
    /// `e(0)/e(T)`.
    pub e1_ratio: f64,
    pub e_inf_ratio: f64,
    pub max_profile_on_compact: f64,
    /// `threshold * max_K f_{lambda0}`.
    pub e_inf_limit: f64,
    pub final_e_inf: f64,
    pub verdict: Verdict,
}

/// Distance of a rescaled run from `f_{lambda0}` in `L¹(w)` and in the sup norm on `K`.
pub fn convergence_report(traj: &Trajectory, profile: &Profile, settings: ConvergenceSettings) -> Result<ConvergenceReport> {
    let ConvergenceSettings { lambda0, lambda1, lambda2, weight, compact, factor, threshold } = settings;
    if traj.form != Form::Rescaled {
        return Err(Error::Mismatch("convergence is measured on rescaled runs".into()));
    }
    positive("lambda2", lambda2)?;
    if !(lambda1 >= lambda0 && lambda0 >= lambda2) {
        return Err(Error::InvalidParams(format!(
            "lambda1 >= lambda0 >= lambda2 (got {lambda1}, {lambda0}, {lambda2})"
        )));
    }
    if !(compact[0] > 0.0 && compact[1] >= compact[0]) {
        return Err(Error::InvalidParams(format!("0 < K lower <= K upper (got {compact:?})")));
    }
    if !(factor >= 1.0 && threshold > 0.0) {
        return Err(Error::InvalidParams("factor >= 1 and threshold > 0".into()));
    }
    weight.validate(&profile.constants)?;
    let grid = &traj.grid;
    let w = weight.values(profile, grid, 1.0)?;
    let target: Vec<f64> = grid.r.iter().map(|&r| profile.eval_f_lambda(lambda0, r)).collect::<Result<_>>()?;
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| grid.r[i] >= compact[0] && grid.r[i] <= compact[1]).collect();
    if inside.is_empty() {
        return Err(Error::Mismatch("no grid node inside K".into()));
    }
    let fmax = inside.iter().map(|&i| target[i]).fold(0.0, f64::max);
    let mut e1 = Vec::with_capacity(traj.snapshots.len());
    let mut e_inf = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        e1.push(weighted_l1(&snap.u, &target, &w, grid, traj.params.n)?);
        e_inf.push(inside.iter().map(|&i| (snap.u[i] - target[i]).abs()).fold(0.0, f64::max));
    }
    let ratio = |v: &[f64]| v[0] / *v.last().unwrap();
    let (e1_ratio, e_inf_ratio) = (ratio(&e1), ratio(&e_inf));
    let final_e_inf = *e_inf.last().unwrap();
    let e_inf_limit = threshold * fmax;
    let pass = e1_ratio >= factor && e_inf_ratio >= factor && final_e_inf <= e_inf_limit;
    Ok(ConvergenceReport {
        note: ANNULUS_NOTE,
        settings,
        times: traj.times(),
        e1,
        e_inf,
        e1_ratio,
        e_inf_ratio,
        max_profile_on_compact: fmax,
        e_inf_limit,
        final_e_inf,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_eq!(omega_n(2), 2.0 * PI);
        assert!((omega_n(3) - 4.0 * PI).abs() < 1e-15);
        assert!((omega_n(4) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((omega_n(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn integrand_constant_in_s_is_exact() {
        let grid = AnnulusGrid::uniform(20.0, 101).unwrap();
        // |a - b| w r^n = 1 for a - b = r^{-n}, w = 1.
        let a = grid.r_pow(-3.0);
        let b = vec![0.0; grid.len()];
        let w = vec![1.0; grid.len()];
        let v = weighted_l1(&a, &b, &w, &grid, 3).unwrap();
        assert!((v / (4.0 * PI * 2.0 * 20f64.ln()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_is_second_order() {
        let err = |nodes: usize| {
            let grid = AnnulusGrid::uniform(3f64.exp(), nodes).unwrap();
            let a = grid.r_pow(-1.0);
            let w = grid.r_pow(-0.5);
            let v = weighted_l1(&a, &vec![0.0; nodes], &w, &grid, 3).unwrap();
            // omega_3 int r^{2 - 1 - 0.5} dr over [e^-3, e^3]
            let k = 1.5f64;
            let exact = 4.0 * PI * ((3.0 * k).exp() - (-3.0 * k).exp()) / k;
            (v - exact).abs() / exact
        };
        let rate = (err(101) / err(201)).log2();
        assert!((rate - 2.0).abs() < 0.02, "rate {rate}");
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let grid = AnnulusGrid::uniform(2.0, 11).unwrap();
        let w = vec![1.0; 11];
        assert!(weighted_l1(&[1.0; 10], &[1.0; 10], &w, &grid, 3).is_err());
        assert!(radial_integral(&[1.0; 12], &grid, 3).is_err());
    }

    #[test]
    fn weight_spec_json() {
        let w: WeightSpec = serde_json::from_str(r#"{"kind": "profile_gamma2", "lambda3": 2.0}"#).unwrap();
        assert_eq!(w, WeightSpec::ProfileGamma2 { lambda3: 2.0, gamma: None });
        let bad = serde_json::from_str::<WeightSpec>(r#"{"kind": "power_mu", "mu": 0.1, "nu": 1}"#);
        assert!(bad.is_err());
    }
}
