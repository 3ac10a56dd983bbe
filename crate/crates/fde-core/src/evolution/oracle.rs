use crate::error::{Error, Result};
use crate::params::DerivedConstants;

/// Value of the extinguishing solution, or the fact that it has vanished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarenblattValue {
    Alive(f64),
    /// `t >= T`: the solution is identically zero.
    Extinct,
}

impl BarenblattValue {
    pub fn value(self) -> f64 {
        match self {
            BarenblattValue::Alive(v) => v,
            BarenblattValue::Extinct => 0.0,
        }
    }
}

/// `B_k(r, t) = (T-t)^{n/(n-2-nm)} (C* / (k + (T-t)^{2/(n-2-nm)} r^2))^{1/(1-m)}`.
pub fn barenblatt(r: f64, t: f64, k: f64, big_t: f64, c: &DerivedConstants) -> Result<BarenblattValue> {
    if !(k > 0.0) || !(big_t > 0.0) || !(t >= 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidParams(format!("k > 0, T > 0, t >= 0, r >= 0 (got k={k}, T={big_t}, t={t}, r={r})")));
    }
    if t >= big_t {
        return Ok(BarenblattValue::Extinct);
    }
    let d = c.d();
    let tau = big_t - t;
    let v = tau.powf(c.n() / d) * (c.cstar / (k + tau.powf(2.0 / d) * r * r)).powf(1.0 / (1.0 - c.m()));
    Ok(BarenblattValue::Alive(v))
}
