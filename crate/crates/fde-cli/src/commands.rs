//! Subcommand implementations.

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use fde_core::asymptotics::{compute_k0_with, expansion_residual_report, Order};
use fde_core::evolution::{
    aronson_benilan_monitor, monitor_slack, ordering_monitor, run_with_profile, unit_profile,
    validate_barenblatt as refine, BarenblattStudy, BoundarySpec, EvolutionConfig, Form, GridSpec,
    InitialSpec, Monitors, OrderingBand, Stepping, Trajectory,
};
use fde_core::measures::{contraction_report, convergence_report, ConvergenceSettings, Verdict, WeightSpec};
use fde_core::params::{derive_constants, validate_regime, ModelParams};
use fde_core::profile::{check_invariants, growth_limits, Profile, ProfileRequest};

use crate::config::{apply_overrides, apply_seed, decode, load, ConfigError, Error, Target};
use crate::output::{envelope, Csv, OutDir};
use crate::Common;

/// Result of a subcommand, mapped onto the exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Completed | Outcome::Pass => 0,
            Outcome::Fail => 2,
            Outcome::Inconclusive => 3,
        }
    }

    fn label(self) -> Option<&'static str> {
        match self {
            Outcome::Completed => None,
            Outcome::Pass => Some("PASS"),
            Outcome::Fail => Some("FAIL"),
            Outcome::Inconclusive => Some("INCONCLUSIVE"),
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Outcome::Pass,
            Verdict::Fail => Outcome::Fail,
            Verdict::Inconclusive => Outcome::Inconclusive,
        }
    }

    /// FAIL dominates INCONCLUSIVE, which dominates PASS.
    fn worst(self, other: Self) -> Self {
        let rank = |o: Outcome| match o {
            Outcome::Completed => 0,
            Outcome::Pass => 1,
            Outcome::Inconclusive => 2,
            Outcome::Fail => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

const PARAMS: [Target; 3] = [
    Target { flag: "n", paths: &["/params/n"] },
    Target { flag: "m", paths: &["/params/m"] },
    Target { flag: "beta", paths: &["/params/beta"] },
];

fn targets(extra: &[Target]) -> Vec<Target> {
    PARAMS.iter().chain(extra).copied().collect()
}

fn default_params() -> Value {
    json!({ "n": 3, "m": 0.2, "beta": -1.0 })
}

fn out_dir(common: &Common) -> Result<OutDir, Error> {
    OutDir::create(common.out.as_deref().unwrap_or(&PathBuf::from("fde-out")))
}

/// Write `report.json`, echo it on stdout and return the outcome.
fn finish<T: Serialize>(out: Option<&OutDir>, command: &str, outcome: Outcome, body: &T) -> Result<Outcome, Error> {
    let doc = envelope(command, outcome.label(), body)?;
    if let Some(out) = out {
        out.write_json("report.json", &doc)?;
    }
    // A closed stdout (e.g. piped into `head`) does not invalidate the written artifacts.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&doc)?);
    Ok(outcome)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsConfig {
    params: ModelParams,
    #[serde(default)]
    mu: Option<f64>,
}

pub fn constants(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), json!({ "params": default_params() }))?;
    apply_overrides(&mut doc, &common.overrides, "constants", &targets(&[Target { flag: "mu", paths: &["/mu"] }]))?;
    let cfg: ConstantsConfig = decode(doc)?;
    let c = derive_constants(cfg.params)?;
    let regime = validate_regime(&c, cfg.mu);
    let out = match &common.out {
        Some(_) => Some(out_dir(common)?),
        None => None,
    };
    finish(out.as_ref(), "constants", Outcome::Completed, &json!({ "params": cfg.params, "constants": c, "regime": regime }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileConfig {
    params: ModelParams,
    #[serde(default = "unit")]
    eta: f64,
    #[serde(default)]
    r0: Option<f64>,
    #[serde(default)]
    r_switch: Option<f64>,
    #[serde(default)]
    s_max: Option<f64>,
    #[serde(default)]
    tol: Option<f64>,
    /// Samples per unit of `log r` in `profile.csv`.
    #[serde(default = "twenty")]
    samples_per_unit: f64,
    #[serde(default = "residual_tol")]
    residual_tol: f64,
    /// Relative tolerance of the growth-limit checks.
    #[serde(default = "percent")]
    growth_tol: f64,
}

fn unit() -> f64 {
    1.0
}
fn twenty() -> f64 {
    20.0
}
fn residual_tol() -> f64 {
    1e-8
}
fn percent() -> f64 {
    0.01
}

pub fn profile(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), json!({ "params": default_params() }))?;
    apply_overrides(
        &mut doc,
        &common.overrides,
        "profile",
        &targets(&[Target { flag: "eta", paths: &["/eta"] }, Target { flag: "smax", paths: &["/s_max"] }]),
    )?;
    let cfg: ProfileConfig = decode(doc)?;
    let mut req = ProfileRequest::new(cfg.params, cfg.eta);
    req.r0 = cfg.r0.unwrap_or(req.r0);
    req.r_switch = cfg.r_switch.unwrap_or(req.r_switch);
    req.s_max = cfg.s_max.unwrap_or(req.s_max);
    req.tol = cfg.tol.unwrap_or(req.tol);
    if !(cfg.samples_per_unit > 0.0) {
        return Err(ConfigError("samples_per_unit > 0".into()).into());
    }
    let p = Profile::compute(req)?;
    let inv = check_invariants(&p);
    let growth = growth_limits(&p)?;

    let out = out_dir(common)?;
    let mut csv = Csv::new(&["s", "log_g", "r_g_r_over_g"]);
    let (lo, hi) = (req.r0.ln(), p.s_max());
    let count = ((hi - lo) * cfg.samples_per_unit).ceil() as usize;
    for k in 0..=count {
        let s = if k == count { hi } else { lo + (hi - lo) * k as f64 / count as f64 };
        let (lg, d) = p.eval_g_log(s)?;
        csv.row(&[s, lg, d]);
    }
    out.write("profile.csv", &csv.into_string())?;
    let mut far = Csv::new(&["s", "w", "w_s", "h"]);
    for i in 0..p.far.s.len() {
        far.row(&[p.far.s[i], p.far.w[i], p.far.w_s[i], p.far.h[i]]);
    }
    out.write("far_field.csv", &far.into_string())?;

    let growth_ok = [growth.w_s_rel, growth.blowup_rel, growth.amplitude_rel].iter().all(|v| v.abs() <= cfg.growth_tol);
    let outcome = Outcome::from_pass(inv.all_pass(cfg.residual_tol) && growth_ok && p.k.converged);
    finish(
        Some(&out),
        "profile",
        outcome,
        &json!({
            "request": req,
            "constants": p.constants,
            "K": p.k,
            "invariants": inv,
            "residual_tol": cfg.residual_tol,
            "growth_limits": growth,
            "growth_tol": cfg.growth_tol,
        }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionConfig {
    n: u32,
    m: f64,
    #[serde(default = "two")]
    eta: f64,
    #[serde(default = "half")]
    beta_tilde: f64,
    #[serde(default = "one_over_log")]
    order: Order,
    #[serde(default = "twenty")]
    s_fit_lo: f64,
    #[serde(default = "sample_step")]
    ds: f64,
    #[serde(default = "s_max")]
    s_max: f64,
    /// Allowed relative error of the fitted next coefficient.
    #[serde(default = "a3_tol")]
    a3_tol: f64,
}

fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn one_over_log() -> Order {
    Order::OneOverLog
}
fn sample_step() -> f64 {
    0.05
}
fn s_max() -> f64 {
    200.0
}
fn a3_tol() -> f64 {
    0.05
}

pub fn expansion(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), json!({ "n": 3, "m": 0.2 }))?;
    let mut overrides = common.overrides.clone();
    if let Some(beta) = overrides.beta.take() {
        doc["beta_tilde"] = json!(-beta);
    }
    apply_overrides(
        &mut doc,
        &overrides,
        "expansion",
        &[
            Target { flag: "n", paths: &["/n"] },
            Target { flag: "m", paths: &["/m"] },
            Target { flag: "eta", paths: &["/eta"] },
            Target { flag: "smax", paths: &["/s_max"] },
        ],
    )?;
    let cfg: ExpansionConfig = decode(doc)?;
    let coeffs = compute_k0_with(cfg.n, cfg.m, cfg.s_max)?;
    let mut req = ProfileRequest::with_beta_tilde(cfg.n, cfg.m, cfg.beta_tilde, cfg.eta)?;
    req.s_max = cfg.s_max;
    let p = Profile::compute(req)?;
    let report = expansion_residual_report(&p, &coeffs, cfg.order, cfg.s_fit_lo, cfg.ds)?;

    let out = out_dir(common)?;
    let mut csv = Csv::new(&[
        "s", "numeric", "partial_leading", "partial_loglog", "partial_constant", "partial_one_over_log",
        "residual_leading", "residual_loglog", "residual_constant", "residual_one_over_log",
    ]);
    for row in &report.rows {
        let mut v = vec![row.s, row.numeric];
        v.extend_from_slice(&row.partial);
        v.extend_from_slice(&row.residual);
        csv.row(&v);
    }
    out.write("expansion.csv", &csv.into_string())?;

    let a3_ok = p.constants.yamabe_case || report.a3_rel_error <= cfg.a3_tol;
    let outcome = Outcome::from_pass(report.trend_decreasing && a3_ok && coeffs.converged && p.k.converged);
    let mut summary = serde_json::to_value(&report)?;
    summary.as_object_mut().expect("object").remove("rows");
    finish(
        Some(&out),
        "expansion",
        outcome,
        &json!({ "coefficients": coeffs, "K": p.k, "a3_tol": cfg.a3_tol, "residuals": summary }),
    )
}

fn default_run() -> Value {
    json!({
        "params": default_params(),
        "grid": { "R": 5f64.exp(), "N": 401 },
        "form": "physical",
        "initial": { "kind": "profile", "lambda": 1.0 },
        "boundary": { "kind": "self_similar", "lambda": 1.0 },
        "stepping": { "dt": 1e-3, "horizon": 0.1 },
    })
}

const RUN_TARGETS: [Target; 4] = [
    Target { flag: "R", paths: &["/grid/R"] },
    Target { flag: "N", paths: &["/grid/N"] },
    Target { flag: "dt", paths: &["/stepping/dt"] },
    Target { flag: "horizon", paths: &["/stepping/horizon"] },
];

fn snapshots_csv(traj: &Trajectory) -> String {
    let mut csv = Csv::new(&["t", "r", "u"]);
    for snap in &traj.snapshots {
        for (&r, &u) in traj.grid.r.iter().zip(&snap.u) {
            csv.row(&[snap.t, r, u]);
        }
    }
    csv.into_string()
}

fn check_completed(traj: &Trajectory) -> Result<(), Error> {
    match &traj.abort_reason {
        Some(reason) => Err(format!("run aborted at t = {}: {reason}", traj.last().t).into()),
        None => Ok(()),
    }
}

pub fn evolve(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), default_run())?;
    let mut t = targets(&RUN_TARGETS);
    t.push(Target { flag: "lambda0", paths: &["/initial/lambda?", "/initial/lambda0?"] });
    t.push(Target { flag: "lambda1", paths: &["/initial/lambda1?"] });
    t.push(Target { flag: "lambda2", paths: &["/initial/lambda2?"] });
    apply_overrides(&mut doc, &common.overrides, "evolve", &t)?;
    apply_seed(&mut doc, &["/seed"])?;
    let cfg: EvolutionConfig = decode(doc)?;
    cfg.validate()?;
    let profile = unit_profile(cfg.params)?;
    let traj = run_with_profile(&cfg, Some(&profile))?;

    let out = out_dir(common)?;
    out.write("snapshots.csv", &snapshots_csv(&traj))?;

    let mut outcome = if traj.abort_reason.is_some() { Outcome::Fail } else { Outcome::Completed };
    let mut monitors = serde_json::Map::new();
    if cfg.monitors.ordering.is_some() || cfg.monitors.aronson_benilan {
        let lambdas = cfg.monitors.ordering.map_or(vec![1.0], |b| vec![b.lambda1, b.lambda2]);
        let mut slack: f64 = 0.0;
        for lambda in lambdas {
            slack = slack.max(monitor_slack(&cfg, &profile, lambda)?);
        }
        if let Some(band) = cfg.monitors.ordering {
            let rep = ordering_monitor(&traj, &profile, band.lambda1, band.lambda2, slack)?;
            outcome = outcome.worst(Outcome::from_pass(rep.pass));
            monitors.insert("ordering".into(), serde_json::to_value(rep)?);
        }
        if cfg.monitors.aronson_benilan && cfg.form == Form::Physical {
            let rep = aronson_benilan_monitor(&traj, slack)?;
            outcome = outcome.worst(Outcome::from_pass(rep.pass));
            monitors.insert("aronson_benilan".into(), serde_json::to_value(rep)?);
        }
    }
    finish(
        Some(&out),
        "evolve",
        outcome,
        &json!({
            "config": cfg,
            "stats": traj.stats,
            "abort_reason": traj.abort_reason,
            "snapshots": traj.snapshots.len(),
            "monitors": monitors,
        }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContractConfig {
    params: ModelParams,
    grid: GridSpec,
    initial1: InitialSpec,
    initial2: InitialSpec,
    boundary: BoundarySpec,
    /// Boundary data of the second run when it differs; no verdict is given then.
    #[serde(default)]
    boundary2: Option<BoundarySpec>,
    stepping: Stepping,
    weights: Vec<WeightSpec>,
    /// Rerun at half resolution to estimate the discretization slack.
    #[serde(default = "yes")]
    half_resolution: bool,
    /// Also check the rescaled distance against its time-inflated bound, where defined.
    #[serde(default)]
    rescaled_variant: bool,
    #[serde(default)]
    seed: u64,
}

fn yes() -> bool {
    true
}

fn default_contract() -> Value {
    json!({
        "params": default_params(),
        "grid": { "R": 5f64.exp(), "N": 2001 },
        "initial1": { "kind": "blend", "theta": 0.75, "lambda1": 2.0, "lambda2": 1.0 },
        "initial2": { "kind": "blend", "theta": 0.25, "lambda1": 2.0, "lambda2": 1.0 },
        "boundary": { "kind": "self_similar", "lambda": 2.0 },
        "stepping": { "dt": 1e-3, "horizon": 1.0 },
        "weights": [
            { "kind": "power_mu", "mu": 0.25 },
            { "kind": "power_mu", "mu": 0.5 },
            { "kind": "profile_gamma2", "lambda3": 1.0 },
        ],
        "rescaled_variant": true,
    })
}

impl ContractConfig {
    fn run_config(&self, initial: &InitialSpec, boundary: &BoundarySpec, nodes: usize) -> EvolutionConfig {
        EvolutionConfig {
            params: self.params,
            grid: GridSpec { radius: self.grid.radius, nodes },
            form: Form::Physical,
            initial: initial.clone(),
            boundary: boundary.clone(),
            stepping: self.stepping,
            monitors: Monitors::default(),
            seed: self.seed,
        }
    }

    fn pair(&self, profile: &Profile, nodes: usize) -> Result<(Trajectory, Trajectory), Error> {
        let b2 = self.boundary2.as_ref().unwrap_or(&self.boundary);
        let a = run_with_profile(&self.run_config(&self.initial1, &self.boundary, nodes), Some(profile))?;
        let b = run_with_profile(&self.run_config(&self.initial2, b2, nodes), Some(profile))?;
        check_completed(&a)?;
        check_completed(&b)?;
        Ok((a, b))
    }
}

pub fn contract(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), default_contract())?;
    let mut t = targets(&RUN_TARGETS);
    t.push(Target { flag: "lambda1", paths: &["/initial1/lambda1?", "/initial2/lambda1?"] });
    t.push(Target { flag: "lambda2", paths: &["/initial1/lambda2?", "/initial2/lambda2?"] });
    t.push(Target { flag: "lambda3", paths: &["/weights/*/lambda3?"] });
    t.push(Target { flag: "mu", paths: &["/weights/*/mu?"] });
    apply_overrides(&mut doc, &common.overrides, "contract", &t)?;
    apply_seed(&mut doc, &["/seed"])?;
    let cfg: ContractConfig = decode(doc)?;
    if cfg.weights.is_empty() {
        return Err(ConfigError("config error at `weights`: at least one weight".into()).into());
    }
    let c = derive_constants(cfg.params)?;
    for w in &cfg.weights {
        w.validate(&c)?;
    }
    let profile = unit_profile(cfg.params)?;
    let (a, b) = cfg.pair(&profile, cfg.grid.nodes)?;
    let coarse = if cfg.half_resolution {
        if cfg.grid.nodes % 2 == 0 {
            return Err(ConfigError("config error at `grid.N`: half-resolution rerun needs an odd node count".into()).into());
        }
        Some(cfg.pair(&profile, (cfg.grid.nodes - 1) / 2 + 1)?)
    } else {
        None
    };

    let mut reports = Vec::new();
    let mut outcome = Outcome::Pass;
    let mut applicable = true;
    for w in &cfg.weights {
        let rescaled = cfg.rescaled_variant && w.has_rescaled_variant(&c);
        let rep = contraction_report(&a, &b, *w, &profile, coarse.as_ref().map(|(x, y)| (x, y)), rescaled)?;
        match rep.verdict {
            Some(v) => outcome = outcome.worst(Outcome::from_verdict(v)),
            None => applicable = false,
        }
        reports.push(rep);
    }
    if !applicable {
        outcome = Outcome::Completed;
    }

    let out = out_dir(common)?;
    let mut cols = vec!["t".to_string()];
    for i in 0..reports.len() {
        cols.push(format!("N_{i}"));
        cols.push(format!("N_plus_{i}"));
    }
    let cols: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&cols);
    for (k, &t) in reports[0].times.iter().enumerate() {
        let mut row = vec![t];
        for r in &reports {
            row.push(r.series[k]);
            row.push(r.positive_part[k]);
        }
        csv.row(&row);
    }
    out.write("contraction.csv", &csv.into_string())?;
    let summaries: Vec<Value> = reports
        .iter()
        .map(|r| {
            json!({
                "weight": r.weight,
                "initial": r.series[0],
                "final": r.series.last(),
                "max_increase": r.max_increase,
                "tolerance": r.tolerance,
                "discretization_slack": r.discretization_slack,
                "slack": r.slack,
                "rescaled_max_excess": r.rescaled.as_ref().map(|x| x.max_excess),
                "verdict": r.verdict,
                "reason": r.reason,
            })
        })
        .collect();
    finish(
        Some(&out),
        "contract",
        outcome,
        &json!({ "note": fde_core::measures::ANNULUS_NOTE, "weights": summaries, "stats": [a.stats, b.stats] }),
    )
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergeConfig {
    params: ModelParams,
    grid: GridSpec,
    initial: InitialSpec,
    /// Defaults to `f_{lambda0}` held fixed.
    #[serde(default)]
    boundary: Option<BoundarySpec>,
    stepping: Stepping,
    settings: ConvergenceSettings,
    #[serde(default)]
    seed: u64,
}

fn default_converge() -> Value {
    json!({
        "params": default_params(),
        "grid": { "R": 5f64.exp(), "N": 2001 },
        "initial": { "kind": "bump", "lambda0": 1.0, "amplitude": 0.1, "center": 1.0, "decades": 1.0 },
        "stepping": { "dt": 1e-2, "horizon": 5.0, "snapshot_every": 10 },
        "settings": {
            "lambda0": 1.0,
            "lambda1": 2.0,
            "lambda2": 0.5,
            "weight": { "kind": "profile_gamma2", "lambda3": 1.0 },
        },
    })
}

pub fn converge(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), default_converge())?;
    let mut t = targets(&RUN_TARGETS);
    t.push(Target { flag: "lambda0", paths: &["/settings/lambda0", "/initial/lambda0?", "/initial/lambda?"] });
    t.push(Target { flag: "lambda1", paths: &["/settings/lambda1"] });
    t.push(Target { flag: "lambda2", paths: &["/settings/lambda2"] });
    t.push(Target { flag: "lambda3", paths: &["/settings/weight/lambda3?"] });
    t.push(Target { flag: "mu", paths: &["/settings/weight/mu?"] });
    apply_overrides(&mut doc, &common.overrides, "converge", &t)?;
    apply_seed(&mut doc, &["/seed"])?;
    let cfg: ConvergeConfig = decode(doc)?;
    let s = cfg.settings;
    let run_cfg = EvolutionConfig {
        params: cfg.params,
        grid: cfg.grid,
        form: Form::Rescaled,
        initial: cfg.initial.clone(),
        boundary: cfg.boundary.clone().unwrap_or(BoundarySpec::Static { lambda: s.lambda0 }),
        stepping: cfg.stepping,
        monitors: Monitors { ordering: Some(OrderingBand { lambda1: s.lambda1, lambda2: s.lambda2 }), ..Default::default() },
        seed: cfg.seed,
    };
    let profile = unit_profile(cfg.params)?;
    let traj = run_with_profile(&run_cfg, Some(&profile))?;
    check_completed(&traj)?;
    let rep = convergence_report(&traj, &profile, s)?;

    let out = out_dir(common)?;
    let mut csv = Csv::new(&["t", "e1", "e_inf"]);
    for k in 0..rep.times.len() {
        csv.row(&[rep.times[k], rep.e1[k], rep.e_inf[k]]);
    }
    out.write("convergence.csv", &csv.into_string())?;
    let mut summary = serde_json::to_value(&rep)?;
    let obj = summary.as_object_mut().expect("object");
    for key in ["times", "e1", "e_inf"] {
        obj.remove(key);
    }
    obj.insert("initial_e1".into(), json!(rep.e1[0]));
    obj.insert("initial_e_inf".into(), json!(rep.e_inf[0]));
    obj.insert("advection".into(), json!(run_cfg.stepping.advection));
    finish(Some(&out), "converge", Outcome::from_verdict(rep.verdict), &summary)
}

pub fn validate_barenblatt(common: &Common) -> Result<Outcome, Error> {
    let mut doc = load(common.config.as_deref(), json!({ "params": default_params() }))?;
    apply_overrides(
        &mut doc,
        &common.overrides,
        "validate-barenblatt",
        &targets(&[Target { flag: "R", paths: &["/R"] }, Target { flag: "horizon", paths: &["/horizon"] }]),
    )?;
    let study: BarenblattStudy = decode(doc)?;
    let v = refine(&study)?;

    let out = out_dir(common)?;
    let mut csv = Csv::new(&["study", "nodes", "ds", "dt", "error", "order"]);
    for (tag, rows) in [(0.0, &v.spatial), (1.0, &v.temporal)] {
        for r in rows {
            csv.row(&[tag, r.nodes as f64, r.ds, r.dt, r.error, r.order.unwrap_or(f64::NAN)]);
        }
    }
    out.write("refinement.csv", &csv.into_string())?;
    let pass = (1.7..=2.3).contains(&v.spatial_order) && (0.8..=1.2).contains(&v.temporal_order);
    finish(
        Some(&out),
        "validate-barenblatt",
        Outcome::from_pass(pass),
        &json!({ "study": study, "refinement": v, "spatial_order_range": [1.7, 2.3], "temporal_order_range": [0.8, 1.2] }),
    )
}
