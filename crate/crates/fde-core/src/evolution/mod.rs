//! Implicit annulus solvers for the radial equation in physical and rescaled form.
//!
//! The punctured space is replaced by `1/R < r < R` with Dirichlet data taken from a
//! self-similar solution, a static profile, the Barenblatt solution or a constant.
//! Time stepping is backward Euler; each step is a Newton solve with tridiagonal
//! Jacobians.

mod grid;
mod oracle;
mod solver;
mod transform;
mod validation;

pub use grid::{build_grid, AnnulusGrid, GridSpec, MIN_NODES};
pub use oracle::{barenblatt, BarenblattValue};
pub use solver::{thomas, Advection, Form, NewtonSettings, StepInfo, Stepper};
pub use transform::{
    inversion_transform, inverted_equation_residual, rescale_transform, unrescale_transform, InvertedResidual,
    Resampled,
};
pub use validation::{validate_barenblatt, BarenblattStudy, BarenblattValidation, RefinementRow};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{derive_constants, DerivedConstants, ModelParams};
use crate::profile::{Profile, ProfileRequest};

/// Nodal values at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialField {
    pub t: f64,
    pub u: Vec<f64>,
    pub form: Form,
}

/// Initial datum, expressed in the variables of the run's form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `f_lambda`.
    Profile { lambda: f64 },
    /// `theta f_{lambda1} + (1-theta) f_{lambda2}`.
    Blend { theta: f64, lambda1: f64, lambda2: f64 },
    /// Blend with a smooth random `theta(s)` in `[0.1, 0.9]`, drawn from the run seed.
    RandomBlend { lambda1: f64, lambda2: f64 },
    /// `f_{lambda0} (1 + amplitude psi)`, `psi` a smooth bump of width `decades` centred at `center`.
    Bump { lambda0: f64, amplitude: f64, center: f64, decades: f64 },
    /// `B_k(., t0)`.
    Barenblatt { k: f64, extinction_time: f64 },
    Constant { value: f64 },
    /// Values at radii `r`, interpolated linearly in `(log r, log u)`.
    Table { r: Vec<f64>, u: Vec<f64> },
}

/// Dirichlet data at both ends of the annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    /// `U_lambda(r, t)` in physical variables, which is `f_lambda(r)` in rescaled ones.
    SelfSimilar { lambda: f64 },
    /// `f_lambda(r)` held fixed in the run's own variables.
    Static { lambda: f64 },
    /// The Barenblatt solution, transformed when the run is rescaled.
    Barenblatt { k: f64, extinction_time: f64 },
    Constant { value: f64 },
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stepping {
    pub dt: f64,
    pub horizon: f64,
    #[serde(default)]
    pub t0: f64,
    /// Keep every k-th accepted step (the final state is always kept).
    #[serde(default = "one")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default)]
    pub advection: Advection,
}

fn one() -> usize {
    1
}

/// Ordering band `f_{lambda1} <= u0 <= f_{lambda2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderingBand {
    pub lambda1: f64,
    pub lambda2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Monitors {
    pub ordering: Option<OrderingBand>,
    pub aronson_benilan: bool,
    /// Rescaled window `[a, b]` that must stay inside the physical annulus.
    pub rescaled_view: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub params: ModelParams,
    pub grid: GridSpec,
    #[serde(default = "physical")]
    pub form: Form,
    pub initial: InitialSpec,
    pub boundary: BoundarySpec,
    pub stepping: Stepping,
    #[serde(default)]
    pub monitors: Monitors,
    #[serde(default)]
    pub seed: u64,
}

fn physical() -> Form {
    Form::Physical
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        build_grid(self.grid.radius, self.grid.nodes)?;
        let st = &self.stepping;
        if !(st.dt > 0.0 && st.horizon > 0.0 && st.dt.is_finite() && st.horizon.is_finite()) {
            return Err(Error::InvalidParams(format!("dt > 0 and horizon > 0 (got {}, {})", st.dt, st.horizon)));
        }
        if !(st.t0 >= 0.0) || st.snapshot_every == 0 {
            return Err(Error::InvalidParams("t0 >= 0 and snapshot_every >= 1".into()));
        }
        if !(st.newton.tol > 0.0) || st.newton.max_iter == 0 {
            return Err(Error::InvalidParams("newton tol > 0 and max_iter >= 1".into()));
        }
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} > 0 (got {v})")))
            }
        };
        match &self.initial {
            InitialSpec::Profile { lambda } => pos("lambda", *lambda)?,
            InitialSpec::Blend { theta, lambda1, lambda2 } => {
                pos("lambda1", *lambda1)?;
                pos("lambda2", *lambda2)?;
                if !(0.0..=1.0).contains(theta) {
                    return Err(Error::InvalidParams(format!("0 <= theta <= 1 (got {theta})")));
                }
            }
            InitialSpec::RandomBlend { lambda1, lambda2 } => {
                pos("lambda1", *lambda1)?;
                pos("lambda2", *lambda2)?;
            }
            InitialSpec::Bump { lambda0, amplitude, decades, .. } => {
                pos("lambda0", *lambda0)?;
                pos("decades", *decades)?;
                if !(*amplitude > -1.0) {
                    return Err(Error::InvalidParams(format!("amplitude > -1 (got {amplitude})")));
                }
            }
            InitialSpec::Barenblatt { k, extinction_time } => {
                pos("k", *k)?;
                pos("extinction_time", *extinction_time)?;
                if st.t0 + st.horizon >= *extinction_time {
                    return Err(Error::InvalidParams("t0 + horizon < extinction_time".into()));
                }
            }
            InitialSpec::Constant { value } => pos("value", *value)?,
            InitialSpec::Table { r, u } => {
                if r.len() != u.len() || r.len() < 2 {
                    return Err(Error::InvalidParams("table needs matching r and u with >= 2 entries".into()));
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] <= 0.0 || u.iter().any(|v| !(*v > 0.0)) {
                    return Err(Error::InvalidParams("table r strictly increasing and positive, u > 0".into()));
                }
            }
        }
        match &self.boundary {
            BoundarySpec::SelfSimilar { lambda } | BoundarySpec::Static { lambda } => pos("lambda", *lambda)?,
            BoundarySpec::Barenblatt { k, extinction_time } => {
                pos("k", *k)?;
                if st.t0 + st.horizon >= *extinction_time {
                    return Err(Error::InvalidParams("t0 + horizon < extinction_time".into()));
                }
            }
            BoundarySpec::Constant { value } => pos("value", *value)?,
        }
        if let Some(b) = self.monitors.ordering {
            pos("lambda1", b.lambda1)?;
            pos("lambda2", b.lambda2)?;
            if b.lambda1 < b.lambda2 {
                return Err(Error::InvalidParams(format!("lambda1 >= lambda2 (got {}, {})", b.lambda1, b.lambda2)));
            }
        }
        if let Some([a, b]) = self.monitors.rescaled_view {
            if !(a > 0.0 && b > a) {
                return Err(Error::InvalidParams(format!("0 < a < b for the rescaled view (got {a}, {b})")));
            }
            if self.form == Form::Physical {
                let limit = rescaled_view_limit(self.grid.radius, a, b, self.params.beta);
                if st.t0 + st.horizon > limit {
                    return Err(Error::InvalidParams(format!("horizon <= log(a R)/|beta| = {limit}")));
                }
            }
        }
        Ok(())
    }

    fn needs_profile(&self) -> bool {
        let init = !matches!(self.initial, InitialSpec::Barenblatt { .. } | InitialSpec::Constant { .. } | InitialSpec::Table { .. });
        let bnd = matches!(self.boundary, BoundarySpec::SelfSimilar { .. } | BoundarySpec::Static { .. });
        init || bnd || self.monitors.ordering.is_some()
    }
}

/// Latest time at which `e^{beta t} [a, b]` still lies inside `[1/R, R]`.
pub fn rescaled_view_limit(radius: f64, a: f64, b: f64, beta: f64) -> f64 {
    let lower = (a * radius).ln() / beta.abs();
    if b > radius {
        return f64::NEG_INFINITY;
    }
    lower
}

/// Smooth bump equal to 1 at `x = 0` and vanishing with all derivatives at `|x| = 1`.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Solver statistics.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SolverStats {
    pub steps: usize,
    pub newton_iterations: usize,
    pub rejections: usize,
    pub damped_steps: usize,
    pub min_dt: f64,
}

/// Snapshots and statistics of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub grid: AnnulusGrid,
    pub form: Form,
    pub boundary: BoundarySpec,
    pub snapshots: Vec<RadialField>,
    pub stats: SolverStats,
    /// Set when the solver gave up; the snapshots end at the last good state.
    pub abort_reason: Option<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|f| f.t).collect()
    }

    pub fn last(&self) -> &RadialField {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }
}

/// Evaluates initial and boundary data.
struct Data<'a> {
    c: &'a DerivedConstants,
    form: Form,
    profile: Option<&'a Profile>,
}

impl Data<'_> {
    fn profile(&self) -> Result<&Profile> {
        self.profile.ok_or_else(|| Error::InvalidParams("this datum needs a profile".into()))
    }

    fn f_lambda(&self, lambda: f64, r: f64) -> Result<f64> {
        self.profile()?.eval_f_lambda(lambda, r)
    }

    /// Physical-variable function `p(r, t)` expressed in the run's variables.
    fn in_form(&self, r: f64, t: f64, p: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
        match self.form {
            Form::Physical => p(r, t),
            Form::Rescaled => Ok((self.c.alpha * t).exp() * p((self.c.beta() * t).exp() * r, t)?),
        }
    }

    fn boundary(&self, spec: &BoundarySpec, r: f64, t: f64) -> Result<f64> {
        match *spec {
            BoundarySpec::SelfSimilar { lambda } => match self.form {
                Form::Physical => self.profile()?.eval_u_lambda(lambda, r, t),
                Form::Rescaled => self.f_lambda(lambda, r),
            },
            BoundarySpec::Static { lambda } => self.f_lambda(lambda, r),
            BoundarySpec::Barenblatt { k, extinction_time } => {
                self.in_form(r, t, |r, t| Ok(barenblatt(r, t, k, extinction_time, self.c)?.value()))
            }
            BoundarySpec::Constant { value } => Ok(value),
        }
    }

    fn initial(&self, spec: &InitialSpec, grid: &AnnulusGrid, t0: f64, seed: u64) -> Result<Vec<f64>> {
        let r = &grid.r;
        match spec {
            InitialSpec::Profile { lambda } => r.iter().map(|&x| self.f_lambda(*lambda, x)).collect(),
            InitialSpec::Blend { theta, lambda1, lambda2 } => r
                .iter()
                .map(|&x| Ok(theta * self.f_lambda(*lambda1, x)? + (1.0 - theta) * self.f_lambda(*lambda2, x)?))
                .collect(),
            InitialSpec::RandomBlend { lambda1, lambda2 } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let coef: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let (lo, hi) = (grid.s[0], grid.s[grid.len() - 1]);
                grid.s
                    .iter()
                    .zip(r)
                    .map(|(&s, &x)| {
                        let y = (s - lo) / (hi - lo);
                        let wave: f64 = coef
                            .iter()
                            .enumerate()
                            .map(|(j, a)| a * ((j + 1) as f64 * std::f64::consts::PI * y).sin())
                            .sum();
                        let theta = 0.5 + 0.1 * wave;
                        Ok(theta * self.f_lambda(*lambda1, x)? + (1.0 - theta) * self.f_lambda(*lambda2, x)?)
                    })
                    .collect()
            }
            InitialSpec::Bump { lambda0, amplitude, center, decades } => {
                let half = 0.5 * decades * std::f64::consts::LN_10;
                grid.s
                    .iter()
                    .zip(r)
                    .map(|(&s, &x)| Ok(self.f_lambda(*lambda0, x)? * (1.0 + amplitude * bump((s - center.ln()) / half))))
                    .collect()
            }
            InitialSpec::Barenblatt { k, extinction_time } => r
                .iter()
                .map(|&x| self.in_form(x, t0, |r, t| Ok(barenblatt(r, t, *k, *extinction_time, self.c)?.value())))
                .collect(),
            InitialSpec::Constant { value } => Ok(vec![*value; r.len()]),
            InitialSpec::Table { r: tr, u: tu } => {
                let ls: Vec<f64> = tr.iter().map(|v| v.ln()).collect();
                let lu: Vec<f64> = tu.iter().map(|v| v.ln()).collect();
                grid.s
                    .iter()
                    .map(|&s| {
                        let tol = 1e-12 * (1.0 + s.abs());
                        if s < ls[0] - tol || s > ls[ls.len() - 1] + tol {
                            return Err(Error::OutOfRange { what: "log r", value: s, lo: ls[0], hi: ls[ls.len() - 1] });
                        }
                        let j = ls.partition_point(|v| *v <= s).clamp(1, ls.len() - 1);
                        let w = (s - ls[j - 1]) / (ls[j] - ls[j - 1]);
                        Ok(((1.0 - w) * lu[j - 1] + w * lu[j]).exp())
                    })
                    .collect()
            }
        }
    }
}

/// Profile with `eta = 1` for the run's parameters, as needed by `f_lambda`.
pub fn unit_profile(params: ModelParams) -> Result<Profile> {
    Profile::compute(ProfileRequest::new(params, 1.0))
}

/// Run `config`, computing the unit profile when the data need one.
pub fn run(config: &EvolutionConfig) -> Result<Trajectory> {
    config.validate()?;
    let profile = if config.needs_profile() { Some(unit_profile(config.params)?) } else { None };
    run_with_profile(config, profile.as_ref())
}

/// Run `config` with a precomputed unit profile.
pub fn run_with_profile(config: &EvolutionConfig, profile: Option<&Profile>) -> Result<Trajectory> {
    config.validate()?;
    let c = derive_constants(config.params)?;
    if let Some(p) = profile {
        if p.request.params != config.params || p.eta() != 1.0 {
            return Err(Error::Mismatch("profile must have eta = 1 and the run's parameters".into()));
        }
    }
    let grid = AnnulusGrid::from_spec(config.grid)?;
    let data = Data { c: &c, form: config.form, profile };
    let st = config.stepping;
    let mut u = data.initial(&config.initial, &grid, st.t0, config.seed)?;
    if let Some(i) = u.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams(format!("initial datum must be positive and finite (node {i})")));
    }
    if let Some(band) = config.monitors.ordering {
        check_initial_band(&data, &grid, &u, band)?;
    }

    let mut stepper = Stepper::new(&grid, &c, config.form, st.advection, st.newton);
    let mut traj = Trajectory {
        params: config.params,
        grid: grid.clone(),
        form: config.form,
        boundary: config.boundary.clone(),
        snapshots: vec![RadialField { t: st.t0, u: u.clone(), form: config.form }],
        stats: SolverStats { min_dt: st.dt, ..Default::default() },
        abort_reason: None,
    };
    let t_end = st.t0 + st.horizon;
    let dt_floor = 1e-12 * st.dt;
    let (r_lo, r_hi) = (grid.r[0], grid.r[grid.len() - 1]);
    let mut t = st.t0;
    let mut dt = st.dt;
    let mut unew = u.clone();
    while t < t_end {
        let mut h = dt.min(t_end - t);
        if t + h > t_end - 1e-9 * st.dt {
            h = t_end - t;
        }
        let tn = if h == t_end - t { t_end } else { t + h };
        let left = data.boundary(&config.boundary, r_lo, tn)?;
        let right = data.boundary(&config.boundary, r_hi, tn)?;
        unew.copy_from_slice(&u);
        match stepper.step(&u, &mut unew, h, left, right, tn) {
            Ok(info) => {
                std::mem::swap(&mut u, &mut unew);
                t = tn;
                traj.stats.steps += 1;
                traj.stats.newton_iterations += info.iterations;
                traj.stats.damped_steps += info.damped as usize;
                traj.stats.min_dt = traj.stats.min_dt.min(h);
                if traj.stats.steps % st.snapshot_every == 0 || t >= t_end {
                    traj.snapshots.push(RadialField { t, u: u.clone(), form: config.form });
                }
                dt = (2.0 * dt).min(st.dt);
            }
            Err(e) => {
                traj.stats.rejections += 1;
                dt = 0.5 * h;
                if dt < dt_floor {
                    traj.abort_reason = Some(format!("time step underflow after: {e}"));
                    if traj.last().t < t {
                        traj.snapshots.push(RadialField { t, u: u.clone(), form: config.form });
                    }
                    break;
                }
            }
        }
    }
    Ok(traj)
}

fn check_initial_band(data: &Data, grid: &AnnulusGrid, u: &[f64], band: OrderingBand) -> Result<()> {
    for (i, (&r, &v)) in grid.r.iter().zip(u).enumerate() {
        let lo = data.f_lambda(band.lambda1, r)?;
        let hi = data.f_lambda(band.lambda2, r)?;
        let tol = 1e-12 * v;
        if v < lo - tol || v > hi + tol {
            return Err(Error::InvalidParams(format!(
                "f_lambda1 <= u0 <= f_lambda2 at node {i} (r = {r:e}: {lo:e} <= {v:e} <= {hi:e})"
            )));
        }
    }
    Ok(())
}

/// Multiplier applied to the exact-solution deviation to obtain monitor slack.
pub const MONITOR_SLACK_FACTOR: f64 = 10.0;

/// Slack for the ordering and Aronson-Benilan monitors: ten times the max relative deviation
/// of a run started from `f_lambda` with self-similar data on the same grid and schedule.
pub fn monitor_slack(config: &EvolutionConfig, profile: &Profile, lambda: f64) -> Result<f64> {
    let mut exact = config.clone();
    exact.initial = InitialSpec::Profile { lambda };
    exact.boundary = BoundarySpec::SelfSimilar { lambda };
    exact.monitors = Monitors::default();
    let traj = run_with_profile(&exact, Some(profile))?;
    let dev = match config.form {
        Form::Physical => max_relative_deviation(&traj, |r, t| profile.eval_u_lambda(lambda, r, t))?,
        Form::Rescaled => max_relative_deviation(&traj, |r, _| profile.eval_f_lambda(lambda, r))?,
    };
    Ok(MONITOR_SLACK_FACTOR * dev)
}

/// Ordering of a trajectory against the self-similar band.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    /// `min (u - U_{lambda1}) / U_{lambda1}` over nodes and snapshots.
    pub min_lower_gap: f64,
    /// `min (U_{lambda2} - u) / U_{lambda2}`.
    pub min_upper_gap: f64,
    pub slack: f64,
    pub pass: bool,
    /// Per-snapshot `(t, lower, upper)`.
    pub series: Vec<(f64, f64, f64)>,
}

/// `U_{lambda1} <= u <= U_{lambda2}` (or `f_{lambda1} <= u~ <= f_{lambda2}` when rescaled), in relative form.
pub fn ordering_monitor(traj: &Trajectory, profile: &Profile, lambda1: f64, lambda2: f64, slack: f64) -> Result<OrderingReport> {
    let mut series = Vec::with_capacity(traj.snapshots.len());
    let (mut lo_min, mut hi_min) = (f64::INFINITY, f64::INFINITY);
    let statics = |lambda: f64| -> Result<Vec<f64>> { traj.grid.r.iter().map(|&r| profile.eval_f_lambda(lambda, r)).collect() };
    let (s1, s2) = if traj.form == Form::Rescaled { (statics(lambda1)?, statics(lambda2)?) } else { (vec![], vec![]) };
    for snap in &traj.snapshots {
        let (mut lo, mut hi) = (f64::INFINITY, f64::INFINITY);
        for (i, (&r, &v)) in traj.grid.r.iter().zip(&snap.u).enumerate() {
            let (b1, b2) = match traj.form {
                Form::Physical => (profile.eval_u_lambda(lambda1, r, snap.t)?, profile.eval_u_lambda(lambda2, r, snap.t)?),
                Form::Rescaled => (s1[i], s2[i]),
            };
            lo = lo.min((v - b1) / b1);
            hi = hi.min((b2 - v) / b2);
        }
        lo_min = lo_min.min(lo);
        hi_min = hi_min.min(hi);
        series.push((snap.t, lo, hi));
    }
    Ok(OrderingReport { min_lower_gap: lo_min, min_upper_gap: hi_min, slack, pass: lo_min >= -slack && hi_min >= -slack, series })
}

/// One-sided time-derivative bound `u_t <= u/((1-m) t)` along a physical trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct AronsonBenilanReport {
    /// `max (u^{k+1} - u^k)/dt - u^{k+1}/((1-m) t^{k+1})` over interior nodes and snapshot pairs.
    pub max_excess: f64,
    /// Same quantity divided by `u^{k+1}/((1-m) t^{k+1})`: positive values violate the bound.
    pub max_relative_excess: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Time is measured from the start of the solution, `t = 0`.
pub fn aronson_benilan_monitor(traj: &Trajectory, slack: f64) -> Result<AronsonBenilanReport> {
    if traj.form != Form::Physical {
        return Err(Error::Mismatch("the Aronson-Benilan bound concerns the physical form".into()));
    }
    let m = traj.params.m;
    let n = traj.grid.len();
    let (mut ex, mut rel) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for w in traj.snapshots.windows(2) {
        let dt = w[1].t - w[0].t;
        let t = w[1].t;
        if !(dt > 0.0 && t > 0.0) {
            continue;
        }
        for i in 1..n - 1 {
            let ut = (w[1].u[i] - w[0].u[i]) / dt;
            let bound = w[1].u[i] / ((1.0 - m) * t);
            ex = ex.max(ut - bound);
            rel = rel.max(ut / bound - 1.0);
        }
    }
    Ok(AronsonBenilanReport { max_excess: ex, max_relative_excess: rel, slack, pass: rel <= slack })
}

/// Max relative deviation of a trajectory from a known exact solution in its own variables.
pub fn max_relative_deviation(traj: &Trajectory, exact: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let mut dev = 0.0f64;
    for snap in &traj.snapshots {
        for (&r, &v) in traj.grid.r.iter().zip(&snap.u) {
            let e = exact(r, snap.t)?;
            dev = dev.max(((v - e) / e).abs());
        }
    }
    Ok(dev)
}

/// Relative L-infinity error of the final snapshot.
pub fn final_relative_error(traj: &Trajectory, exact: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let snap = traj.last();
    let mut dev = 0.0f64;
    for (&r, &v) in traj.grid.r.iter().zip(&snap.u) {
        let e = exact(r, snap.t)?;
        dev = dev.max(((v - e) / e).abs());
    }
    Ok(dev)
}
