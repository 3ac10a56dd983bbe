use serde::Serialize;

use super::grid::AnnulusGrid;
use super::{RadialField, Trajectory};
use crate::error::{Error, Result};
use crate::interp::Hermite;
use crate::params::DerivedConstants;
use super::solver::Form;

/// Field resampled onto grid nodes; `None` where the source does not cover the node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resampled {
    pub t: f64,
    pub form: Form,
    pub values: Vec<Option<f64>>,
}

impl Resampled {
    /// Number of nodes without a value.
    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Cubic Hermite interpolant of `log u` against `s` with three-point slopes.
fn log_interpolant(grid: &AnnulusGrid, u: &[f64]) -> Hermite {
    let n = u.len();
    let y: Vec<f64> = u.iter().map(|v| v.ln()).collect();
    let h = grid.ds;
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    }
    Hermite::new(grid.s.clone(), y, d)
}

/// Evaluate `e^{a} u(e^{shift} r_j)` at every node, with `u` given on the same grid.
fn shifted(grid: &AnnulusGrid, u: &[f64], shift: f64, log_factor: f64) -> Vec<Option<f64>> {
    let it = log_interpolant(grid, u);
    let (lo, hi) = (it.lo(), it.hi());
    grid.s
        .iter()
        .map(|s| {
            let x = s + shift;
            let tol = 1e-12 * (1.0 + x.abs());
            if x < lo - tol || x > hi + tol {
                None
            } else {
                Some((log_factor + it.eval(x.clamp(lo, hi)).0).exp())
            }
        })
        .collect()
}

/// `u~(r, t) = e^{alpha t} u(e^{beta t} r, t)` on the nodes of `grid`.
pub fn rescale_transform(field: &RadialField, grid: &AnnulusGrid, c: &DerivedConstants) -> Result<Resampled> {
    if field.form != Form::Physical {
        return Err(Error::Mismatch("rescale_transform expects a physical field".into()));
    }
    check_len(field, grid)?;
    let t = field.t;
    Ok(Resampled { t, form: Form::Rescaled, values: shifted(grid, &field.u, c.beta() * t, c.alpha * t) })
}

/// Inverse of [`rescale_transform`]: `u(r, t) = e^{-alpha t} u~(e^{-beta t} r, t)`.
pub fn unrescale_transform(field: &RadialField, grid: &AnnulusGrid, c: &DerivedConstants) -> Result<Resampled> {
    if field.form != Form::Rescaled {
        return Err(Error::Mismatch("unrescale_transform expects a rescaled field".into()));
    }
    check_len(field, grid)?;
    let t = field.t;
    Ok(Resampled { t, form: Form::Physical, values: shifted(grid, &field.u, -c.beta() * t, -c.alpha * t) })
}

fn check_len(field: &RadialField, grid: &AnnulusGrid) -> Result<()> {
    if field.u.len() != grid.len() {
        return Err(Error::Mismatch(format!("field has {} nodes, grid has {}", field.u.len(), grid.len())));
    }
    Ok(())
}

/// `u_bar(r) = r^{-(n-2)/m} u(1/r)` on a grid symmetric under `r -> 1/r`.
pub fn inversion_transform(field: &RadialField, grid: &AnnulusGrid, c: &DerivedConstants) -> Result<RadialField> {
    check_len(field, grid)?;
    if !grid.is_symmetric() {
        return Err(Error::Mismatch("inversion needs a grid symmetric under r -> 1/r".into()));
    }
    let q = (c.n() - 2.0) / c.m();
    let n = grid.len();
    let u = (0..n).map(|i| (-q * grid.s[i]).exp() * field.u[n - 1 - i]).collect();
    Ok(RadialField { t: field.t, u, form: field.form })
}

/// Residual of `u_bar_t = ((n-1)/m) r^{n+2-(n-2)/m} Delta u_bar^m` along a physical trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct InvertedResidual {
    /// Max over nodes and snapshot pairs of `|residual| / u_bar`.
    pub max_relative: f64,
    pub pairs: usize,
}

/// The Laplacian is taken with non-conservative centered differences, independent of the
/// flux stencil used by the solver, so the residual measures truncation error.
pub fn inverted_equation_residual(traj: &Trajectory, c: &DerivedConstants) -> Result<InvertedResidual> {
    if traj.form != Form::Physical {
        return Err(Error::Mismatch("inverted residual needs a physical trajectory".into()));
    }
    let grid = &traj.grid;
    let n = grid.len();
    let h = grid.ds;
    let nn = c.n();
    let m = c.m();
    let a = nn + 2.0 - (nn - 2.0) / m;
    let mut max_rel = 0.0f64;
    let mut pairs = 0;
    for w in traj.snapshots.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            continue;
        }
        let b0 = inversion_transform(&w[0], grid, c)?;
        let b1 = inversion_transform(&w[1], grid, c)?;
        let phi: Vec<f64> = b1.u.iter().map(|v| v.powf(m)).collect();
        // Skip the first interior node on each side where one-sided effects of the boundary live.
        for i in 2..n - 2 {
            let ps = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
            let pss = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / (h * h);
            let s = grid.s[i];
            let lap = (-2.0 * s).exp() * (pss + (nn - 2.0) * ps);
            let rhs = c.diffusivity() * (a * s).exp() * lap;
            let lhs = (b1.u[i] - b0.u[i]) / dt;
            max_rel = max_rel.max(((lhs - rhs) / b1.u[i]).abs());
        }
        pairs += 1;
    }
    Ok(InvertedResidual { max_relative: max_rel, pairs })
}
