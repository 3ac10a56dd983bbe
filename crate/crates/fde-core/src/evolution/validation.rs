//! Refinement studies against the Barenblatt solution.

use serde::{Deserialize, Serialize};

use super::{
    barenblatt, final_relative_error, run, Advection, BoundarySpec, EvolutionConfig, Form, GridSpec, InitialSpec,
    Monitors, NewtonSettings, Stepping,
};
use crate::error::{Error, Result};
use crate::params::{derive_constants, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarenblattStudy {
    pub params: ModelParams,
    #[serde(default = "one")]
    pub k: f64,
    #[serde(default = "one")]
    pub extinction_time: f64,
    #[serde(rename = "R", default = "ten")]
    pub radius: f64,
    #[serde(default = "half")]
    pub horizon: f64,
    /// Node counts of the spatial study; `dt = dt_factor ds^2` keeps the time error subdominant.
    #[serde(default = "spatial_nodes")]
    pub spatial_nodes: Vec<usize>,
    #[serde(default = "dt_factor")]
    pub dt_factor: f64,
    /// Fixed grid and halving steps of the temporal study.
    #[serde(default = "temporal_nodes")]
    pub temporal_nodes: usize,
    #[serde(default = "temporal_dts")]
    pub temporal_dts: Vec<f64>,
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn half() -> f64 {
    0.5
}
fn spatial_nodes() -> Vec<usize> {
    vec![41, 81, 161, 321]
}
fn dt_factor() -> f64 {
    0.05
}
fn temporal_nodes() -> usize {
    161
}
fn temporal_dts() -> Vec<f64> {
    vec![0.02, 0.01, 0.005, 0.0025]
}

impl BarenblattStudy {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            k: 1.0,
            extinction_time: 1.0,
            radius: 10.0,
            horizon: 0.5,
            spatial_nodes: spatial_nodes(),
            dt_factor: dt_factor(),
            temporal_nodes: temporal_nodes(),
            temporal_dts: temporal_dts(),
        }
    }

    fn config(&self, nodes: usize, dt: f64) -> EvolutionConfig {
        let steps = (self.horizon / dt).ceil().max(1.0);
        EvolutionConfig {
            params: self.params,
            grid: GridSpec { radius: self.radius, nodes },
            form: Form::Physical,
            initial: InitialSpec::Barenblatt { k: self.k, extinction_time: self.extinction_time },
            boundary: BoundarySpec::Barenblatt { k: self.k, extinction_time: self.extinction_time },
            stepping: Stepping {
                dt: self.horizon / steps,
                horizon: self.horizon,
                t0: 0.0,
                snapshot_every: usize::MAX,
                newton: NewtonSettings::default(),
                advection: Advection::default(),
            },
            monitors: Monitors::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub nodes: usize,
    pub ds: f64,
    pub dt: f64,
    /// Relative L-infinity error at the horizon; for the temporal study, distance to the next finer step.
    pub error: f64,
    /// `log2` of the error ratio to the previous row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BarenblattValidation {
    pub spatial: Vec<RefinementRow>,
    pub temporal: Vec<RefinementRow>,
    /// Order from the two finest rows of each study.
    pub spatial_order: f64,
    pub temporal_order: f64,
}

fn completed(traj: super::Trajectory) -> Result<super::Trajectory> {
    match &traj.abort_reason {
        Some(reason) => Err(Error::Solver { t: traj.last().t, reason: reason.clone() }),
        None => Ok(traj),
    }
}

fn with_orders(rows: &mut [RefinementRow]) {
    for i in 1..rows.len() {
        rows[i].order = Some((rows[i - 1].error / rows[i].error).log2());
    }
}

/// Spatial order from exact-solution errors; temporal order from self-convergence on a fixed grid.
pub fn validate_barenblatt(study: &BarenblattStudy) -> Result<BarenblattValidation> {
    if study.spatial_nodes.len() < 2 || study.temporal_dts.len() < 3 {
        return Err(Error::InvalidParams("at least two grids and three time steps".into()));
    }
    if !(study.horizon > 0.0 && study.horizon < study.extinction_time) {
        return Err(Error::InvalidParams("0 < horizon < extinction_time".into()));
    }
    let c = derive_constants(study.params)?;
    let exact = |r: f64, t: f64| Ok(barenblatt(r, t, study.k, study.extinction_time, &c)?.value());

    let mut spatial = Vec::new();
    for &nodes in &study.spatial_nodes {
        let ds = 2.0 * study.radius.ln() / (nodes as f64 - 1.0);
        let cfg = study.config(nodes, study.dt_factor * ds * ds);
        let traj = completed(run(&cfg)?)?;
        let error = final_relative_error(&traj, exact)?;
        spatial.push(RefinementRow { nodes, ds, dt: cfg.stepping.dt, error, order: None });
    }
    with_orders(&mut spatial);

    let nodes = study.temporal_nodes;
    let ds = 2.0 * study.radius.ln() / (nodes as f64 - 1.0);
    let mut finals = Vec::new();
    for &dt in &study.temporal_dts {
        let cfg = study.config(nodes, dt);
        finals.push((cfg.stepping.dt, completed(run(&cfg)?)?.last().u.clone()));
    }
    let mut temporal: Vec<RefinementRow> = finals
        .windows(2)
        .map(|w| {
            let error = w[0].1.iter().zip(&w[1].1).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
            RefinementRow { nodes, ds, dt: w[0].0, error, order: None }
        })
        .collect();
    with_orders(&mut temporal);

    let last = |rows: &[RefinementRow]| rows.last().and_then(|r| r.order).unwrap_or(f64::NAN);
    Ok(BarenblattValidation { spatial_order: last(&spatial), temporal_order: last(&temporal), spatial, temporal })
}
