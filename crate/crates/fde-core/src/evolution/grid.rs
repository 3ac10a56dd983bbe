use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes uniform in `s = log r` on the annulus `1/R < r < R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnulusGrid {
    pub radius: f64,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub ds: f64,
}

/// Grid parameters as they appear in run configurations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "N")]
    pub nodes: usize,
}

pub const MIN_NODES: usize = 16;

pub fn build_grid(radius: f64, nodes: usize) -> Result<AnnulusGrid> {
    if !(radius > 1.0 && radius.is_finite()) {
        return Err(Error::InvalidParams(format!("R > 1 (got {radius})")));
    }
    if nodes < MIN_NODES {
        return Err(Error::InvalidParams(format!("N >= {MIN_NODES} (got {nodes})")));
    }
    AnnulusGrid::uniform(radius, nodes)
}

impl AnnulusGrid {
    /// Like [`build_grid`] without the node-count floor; used for tiny examples.
    pub fn uniform(radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 1.0 && radius.is_finite()) || nodes < 3 {
            return Err(Error::InvalidParams(format!("R > 1 and N >= 3 (got R = {radius}, N = {nodes})")));
        }
        let l = radius.ln();
        let ds = 2.0 * l / (nodes - 1) as f64;
        let mid = (nodes - 1) as f64 / 2.0;
        // Index from the centre so that s_i = -s_{N-1-i} holds exactly.
        let s: Vec<f64> = (0..nodes).map(|i| (i as f64 - mid) * ds).collect();
        let mut r: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        r[0] = 1.0 / radius;
        r[nodes - 1] = radius;
        let mut s = s;
        s[0] = -l;
        s[nodes - 1] = l;
        Ok(Self { radius, s, r, ds })
    }

    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        build_grid(spec.radius, spec.nodes)
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// `r^p` at every node, e.g. `p = n - 1` for the radial measure.
    pub fn r_pow(&self, p: f64) -> Vec<f64> {
        self.s.iter().map(|s| (p * s).exp()).collect()
    }

    /// True when `s_i = -s_{N-1-i}` to rounding.
    pub fn is_symmetric(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (self.s[i] + self.s[n - 1 - i]).abs() <= 1e-12 * (1.0 + self.s[i].abs()))
    }

    /// Same nodes as `other`.
    pub fn same_as(&self, other: &AnnulusGrid) -> bool {
        self.len() == other.len() && self.radius == other.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_grid() {
        let g = AnnulusGrid::uniform(std::f64::consts::E, 3).unwrap();
        assert!((g.r[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.r[1], 1.0);
        assert!((g.r[2] - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn spacing_and_symmetry() {
        let g = build_grid(10.0, 201).unwrap();
        assert!((g.ds - 2.0 * 10f64.ln() / 200.0).abs() < 1e-15);
        assert!(g.is_symmetric());
        assert_eq!(g.r[0], 0.1);
        assert_eq!(g.r[200], 10.0);
        assert!(g.s.windows(2).all(|w| w[1] > w[0]));
        for i in 0..201 {
            assert!((g.r[i] * g.r[200 - i] - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(build_grid(1.0, 100).is_err());
        assert!(build_grid(0.5, 100).is_err());
        assert!(build_grid(10.0, 15).is_err());
    }
}
