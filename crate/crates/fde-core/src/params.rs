//! Parameter regime and derived constants.
//!
//! Everything downstream consumes a [`DerivedConstants`] record built once from
//! `(n, m, beta)`. For rational inputs the same quantities are available in exact
//! arithmetic through [`exact_constants`], which the tests use to pin examples.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide the Yamabe case `m = (n-2)/(n+2)` in floating point.
const YAMABE_TOL: f64 = 1e-12;

/// Dimension, exponent and self-similarity rate of the singular solutions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: u32,
    pub m: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(n: u32, m: f64, beta: f64) -> Result<Self> {
        let p = Self { n, m, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParams(format!("n >= 3 (got n = {})", self.n)));
        }
        let mc = self.m_critical();
        if !(self.m.is_finite() && self.m > 0.0 && self.m < mc) {
            return Err(Error::InvalidParams(format!(
                "0 < m < (n-2)/n = {mc} (got m = {})",
                self.m
            )));
        }
        if !(self.beta.is_finite() && self.beta < 0.0) {
            return Err(Error::InvalidParams(format!("beta < 0 (got beta = {})", self.beta)));
        }
        Ok(())
    }

    /// Upper end `(n-2)/n` of the admissible exponent range.
    pub fn m_critical(&self) -> f64 {
        (self.n as f64 - 2.0) / self.n as f64
    }

    /// Same `(n, m)` with a different `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.n, self.m, beta)
    }
}

/// Every exponent and coefficient used by the profile, expansion and solver code.
///
/// `a1` holds only the closed-form leading part `(n-2-(n+2)m)^2 / (4(n-2-nm)^2)`;
/// the full coefficient needs `K(1,1)` and lives in the expansion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    #[serde(skip)]
    pub params: ModelParams,
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub beta_tilde: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub mu1: f64,
    pub b0: f64,
    pub b1: f64,
    pub a0: f64,
    pub a1: f64,
    pub blowup_const: f64,
    pub farfield_slope: f64,
    pub loglog_coeff: f64,
    pub h1_slope: f64,
    pub h1_tail_coeff: f64,
    pub yamabe_case: bool,
    pub cstar: f64,
}

pub fn derive_constants(p: ModelParams) -> Result<DerivedConstants> {
    p.validate()?;
    let n = p.n as f64;
    let m = p.m;
    let beta = p.beta;
    let d = n - 2.0 - n * m;
    let yamabe_case = is_yamabe(p.n, m);
    let e = if yamabe_case { 0.0 } else { n - 2.0 - (n + 2.0) * m };

    let alpha = 2.0 * beta / (1.0 - m);
    let alpha_tilde = alpha - (n - 2.0) / m * beta;
    let beta_tilde = -beta;
    let mu1 = n - 2.0 / (1.0 - m);
    let delta1 = 1.0 - d / m;
    let b1 = 2.0 * d / (1.0 - m);

    Ok(DerivedConstants {
        params: p,
        alpha,
        alpha_tilde,
        beta_tilde,
        gamma1: d / (m * (1.0 - m)),
        gamma2: (1.0 - m) / (2.0 * m) * mu1,
        gamma3: (n * beta_tilde / alpha_tilde - 1.0) / m,
        delta0: (1.0 - delta1) / 2.0,
        delta1,
        mu1,
        b0: ((n + 2.0) * m - (n - 2.0)) / (1.0 - m),
        b1,
        a0: (n - 1.0) * b1 / beta_tilde,
        a1: e * e / (4.0 * d * d),
        blowup_const: 2.0 * (n - 1.0) * d / ((1.0 - m) * beta.abs()),
        farfield_slope: 2.0 * (n - 1.0) * d / ((1.0 - m) * beta_tilde),
        loglog_coeff: e / (2.0 * d),
        h1_slope: (n - 1.0) * e / ((1.0 - m) * beta_tilde),
        h1_tail_coeff: (n - 1.0) * e * e / (2.0 * d * (1.0 - m) * beta_tilde),
        yamabe_case,
        cstar: 2.0 * (n - 1.0) * d / (1.0 - m),
    })
}

fn is_yamabe(n: u32, m: f64) -> bool {
    let n = n as f64;
    let target = (n - 2.0) / (n + 2.0);
    (m - target).abs() <= YAMABE_TOL * target
}

impl DerivedConstants {
    pub fn n(&self) -> f64 {
        self.params.n as f64
    }

    pub fn m(&self) -> f64 {
        self.params.m
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    /// `alpha_tilde / beta_tilde = (n-2)/m - 2/(1-m)`.
    pub fn kappa(&self) -> f64 {
        (self.n() - 2.0) / self.m() - 2.0 / (1.0 - self.m())
    }

    /// `n - 2 - n m`.
    pub fn d(&self) -> f64 {
        self.n() - 2.0 - self.n() * self.m()
    }

    /// `n - 2 - (n+2) m`, exactly zero in the Yamabe case.
    pub fn e(&self) -> f64 {
        if self.yamabe_case {
            0.0
        } else {
            self.n() - 2.0 - (self.n() + 2.0) * self.m()
        }
    }

    /// Exponent `theta = 1 - delta1 = (n-2-nm)/m` of the leading correction `g - eta ~ r^theta`.
    pub fn theta(&self) -> f64 {
        self.d() / self.m()
    }

    /// Diffusion prefactor `(n-1)/m`.
    pub fn diffusivity(&self) -> f64 {
        (self.n() - 1.0) / self.m()
    }

    /// Exponent of the amplitude factor in `f_lambda(x) = lambda^{2/(1-m)} f_1(lambda x)`.
    pub fn lambda_exponent(&self) -> f64 {
        2.0 / (1.0 - self.m())
    }
}

/// Applicability of one theorem-level hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeFlag {
    pub applies: bool,
    /// The inequality that fails, when `applies` is false.
    pub violated: Option<String>,
}

impl RegimeFlag {
    fn check(ok: bool, violated: impl Into<String>) -> Self {
        Self { applies: ok, violated: if ok { None } else { Some(violated.into()) } }
    }
}

/// Which branch of the origin behaviour of `g_r` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginCase {
    /// `m < (n-2)/(n+1)`: `delta1 < 0` and `g_r(0) = 0`.
    A,
    /// `m >= (n-2)/(n+1)`: `delta1` in `[0, 1)` and `g_r` may blow up at 0.
    B,
}

/// Advisory regime flags; computation never blocks on them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub thm13_mu_range: Option<RegimeFlag>,
    pub thm15_16: RegimeFlag,
    pub thm17: RegimeFlag,
    pub case_a_vs_b: OriginCase,
}

pub fn validate_regime(c: &DerivedConstants, mu: Option<f64>) -> RegimeReport {
    let n = c.n();
    let m = c.m();
    let nu = c.params.n;

    let thm13_mu_range = mu.map(|mu| {
        if !(mu > 0.0) {
            RegimeFlag::check(false, format!("mu > 0 (got {mu})"))
        } else if mu < c.mu1 {
            RegimeFlag::check(true, "")
        } else if mu == c.mu1 {
            let bound = c.params.m_critical().min(0.5);
            RegimeFlag::check(m < bound, format!("mu = mu1 requires m < min((n-2)/n, 1/2) = {bound}"))
        } else {
            RegimeFlag::check(false, format!("mu <= mu1 = {} (got {mu})", c.mu1))
        }
    });

    let thm15_16 = if !(nu == 3 || nu == 4) {
        RegimeFlag::check(false, format!("n in {{3, 4}} (got n = {nu})"))
    } else {
        let lo = (n - 2.0) / (n + 2.0);
        RegimeFlag::check(
            m >= lo || c.yamabe_case,
            format!("(n-2)/(n+2) = {lo} <= m"),
        )
    };

    let thm17 = if !(3..8).contains(&nu) {
        RegimeFlag::check(false, format!("3 <= n < 8 (got n = {nu})"))
    } else {
        let lo = 1.0 - (2.0 / n).sqrt();
        let hi = (2.0 * (n - 2.0) / (3.0 * n)).min((n - 2.0) / (n + 2.0));
        if m < lo {
            RegimeFlag::check(false, format!("1 - sqrt(2/n) = {lo} <= m"))
        } else {
            RegimeFlag::check(
                m < hi && !c.yamabe_case,
                format!("m < min(2(n-2)/(3n), (n-2)/(n+2)) = {hi}"),
            )
        }
    };

    let case_a_vs_b = if m < (n - 2.0) / (n + 1.0) { OriginCase::A } else { OriginCase::B };

    RegimeReport { thm13_mu_range, thm15_16, thm17, case_a_vs_b }
}

pub type Q = Ratio<i128>;

/// The rational-valued subset of [`DerivedConstants`] in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactConstants {
    pub alpha: Q,
    pub alpha_tilde: Q,
    pub beta_tilde: Q,
    pub gamma1: Q,
    pub gamma2: Q,
    pub gamma3: Q,
    pub delta0: Q,
    pub delta1: Q,
    pub mu1: Q,
    pub b0: Q,
    pub b1: Q,
    pub a0: Q,
    pub a1: Q,
    pub blowup_const: Q,
    pub farfield_slope: Q,
    pub loglog_coeff: Q,
    pub h1_slope: Q,
    pub h1_tail_coeff: Q,
    pub yamabe_case: bool,
    pub cstar: Q,
}

/// Exact constants for integer `n`, rational `m` and rational `beta`.
pub fn exact_constants(n: i64, m: Q, beta: Q) -> Result<ExactConstants> {
    let zero = Q::from_integer(0);
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    let nq = Q::from_integer(n as i128);
    if n < 3 {
        return Err(Error::InvalidParams(format!("n >= 3 (got n = {n})")));
    }
    if !(m > zero && m < (nq - two) / nq) {
        return Err(Error::InvalidParams(format!("0 < m < (n-2)/n (got m = {m})")));
    }
    if beta >= zero {
        return Err(Error::InvalidParams(format!("beta < 0 (got beta = {beta})")));
    }
    let d = nq - two - nq * m;
    let e = nq - two - (nq + two) * m;
    let alpha = two * beta / (one - m);
    let alpha_tilde = alpha - (nq - two) / m * beta;
    let beta_tilde = -beta;
    let mu1 = nq - two / (one - m);
    let delta1 = one - d / m;
    let b1 = two * d / (one - m);
    let four = Q::from_integer(4);
    Ok(ExactConstants {
        alpha,
        alpha_tilde,
        beta_tilde,
        gamma1: d / (m * (one - m)),
        gamma2: (one - m) / (two * m) * mu1,
        gamma3: (nq * beta_tilde / alpha_tilde - one) / m,
        delta0: (one - delta1) / two,
        delta1,
        mu1,
        b0: ((nq + two) * m - (nq - two)) / (one - m),
        b1,
        a0: (nq - one) * b1 / beta_tilde,
        a1: e * e / (four * d * d),
        blowup_const: two * (nq - one) * d / ((one - m) * -beta),
        farfield_slope: two * (nq - one) * d / ((one - m) * beta_tilde),
        loglog_coeff: e / (two * d),
        h1_slope: (nq - one) * e / ((one - m) * beta_tilde),
        h1_tail_coeff: (nq - one) * e * e / (two * d * (one - m) * beta_tilde),
        yamabe_case: e == zero,
        cstar: two * (nq - one) * d / (one - m),
    })
}

/// Floating-point value of an exact rational.
pub fn q_to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(a: i128, b: i128) -> Q {
        Q::new(a, b)
    }

    #[test]
    fn hand_example_n3_m02() {
        let c = derive_constants(ModelParams::new(3, 0.2, -1.0).unwrap()).unwrap();
        assert_relative_eq!(c.alpha, -2.5, max_relative = 1e-15);
        assert_relative_eq!(c.alpha_tilde, 2.5, max_relative = 1e-15);
        assert_relative_eq!(c.beta_tilde, 1.0);
        assert_relative_eq!(c.gamma1, 2.5, max_relative = 1e-15);
        assert_relative_eq!(c.gamma2, 1.0, max_relative = 1e-15);
        assert_relative_eq!(c.gamma3, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.mu1, 0.5, max_relative = 1e-15);
        assert_relative_eq!(c.farfield_slope, 2.0, max_relative = 1e-15);
        assert_eq!(c.loglog_coeff, 0.0);
        assert!(c.yamabe_case);
    }

    #[test]
    fn hand_example_n3_m025() {
        let c = derive_constants(ModelParams::new(3, 0.25, -1.0).unwrap()).unwrap();
        assert_relative_eq!(c.alpha, -8.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.alpha_tilde, 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.gamma1, 4.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.mu1, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.e(), -0.25, max_relative = 1e-15);
        assert!(!c.yamabe_case);
        assert_relative_eq!(c.h1_slope, -2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(c.a1, 0.25, max_relative = 1e-14);
    }

    #[test]
    fn hand_example_n4() {
        let c = derive_constants(ModelParams::new(4, 1.0 / 3.0, -2.0).unwrap()).unwrap();
        assert_relative_eq!(c.alpha_tilde / c.beta_tilde, 3.0, max_relative = 1e-14);
        assert_relative_eq!(c.beta_tilde, 2.0);
        assert_relative_eq!(c.blowup_const, 3.0, max_relative = 1e-14);
        assert!(c.yamabe_case);
    }

    #[test]
    fn exact_matches_hand_arithmetic() {
        let e = exact_constants(3, q(1, 4), q(-1, 1)).unwrap();
        assert_eq!(e.alpha, q(-8, 3));
        assert_eq!(e.alpha_tilde, q(4, 3));
        assert_eq!(e.gamma1, q(4, 3));
        assert_eq!(e.mu1, q(1, 3));
        assert_eq!(e.h1_slope, q(-2, 3));
        assert_eq!(e.a1, q(1, 4));
        assert!(!e.yamabe_case);

        let e = exact_constants(3, q(1, 5), q(-1, 1)).unwrap();
        assert_eq!(e.gamma2, q(1, 1));
        assert_eq!(e.gamma3, q(1, 1));
        assert_eq!(e.farfield_slope, q(2, 1));
        assert!(e.yamabe_case);

        let e = exact_constants(4, q(1, 3), q(-2, 1)).unwrap();
        assert_eq!(e.blowup_const, q(3, 1));
    }

    #[test]
    fn float_agrees_with_exact() {
        let cases = [(3, 1, 5, -1, 1), (3, 1, 4, -1, 2), (3, 19, 100, -3, 2), (4, 1, 3, -2, 1), (5, 1, 7, -1, 3)];
        for (n, mn, md, bn, bd) in cases {
            let m = q(mn, md);
            let b = q(bn, bd);
            let ex = exact_constants(n, m, b).unwrap();
            let fl = derive_constants(ModelParams::new(n as u32, q_to_f64(&m), q_to_f64(&b)).unwrap()).unwrap();
            let pairs = [
                (fl.alpha, &ex.alpha),
                (fl.alpha_tilde, &ex.alpha_tilde),
                (fl.gamma1, &ex.gamma1),
                (fl.gamma2, &ex.gamma2),
                (fl.gamma3, &ex.gamma3),
                (fl.delta0, &ex.delta0),
                (fl.delta1, &ex.delta1),
                (fl.mu1, &ex.mu1),
                (fl.b0, &ex.b0),
                (fl.b1, &ex.b1),
                (fl.a0, &ex.a0),
                (fl.a1, &ex.a1),
                (fl.blowup_const, &ex.blowup_const),
                (fl.farfield_slope, &ex.farfield_slope),
                (fl.loglog_coeff, &ex.loglog_coeff),
                (fl.h1_slope, &ex.h1_slope),
                (fl.h1_tail_coeff, &ex.h1_tail_coeff),
                (fl.cstar, &ex.cstar),
            ];
            for (x, y) in pairs {
                let y = q_to_f64(y);
                assert!((x - y).abs() <= 1e-13 * (1.0 + y.abs()), "{x} vs {y} at n={n}, m={m}");
            }
            assert_eq!(fl.yamabe_case, ex.yamabe_case);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(ModelParams::new(2, 0.1, -1.0), Err(Error::InvalidParams(_))));
        assert!(ModelParams::new(3, 1.0 / 3.0, -1.0).is_err());
        assert!(ModelParams::new(3, 0.0, -1.0).is_err());
        assert!(ModelParams::new(3, 0.2, 0.0).is_err());
        assert!(ModelParams::new(3, 0.2, f64::NAN).is_err());
        let msg = ModelParams::new(3, 0.2, 1.0).unwrap_err().to_string();
        assert!(msg.contains("beta < 0"));
    }

    #[test]
    fn regime_examples() {
        let c = derive_constants(ModelParams::new(3, 0.2, -1.0).unwrap()).unwrap();
        let r = validate_regime(&c, Some(0.4));
        assert!(r.thm13_mu_range.unwrap().applies);
        assert!(r.thm15_16.applies);
        assert_eq!(r.case_a_vs_b, OriginCase::A);

        let c = derive_constants(ModelParams::new(3, 0.19, -1.0).unwrap()).unwrap();
        assert!(validate_regime(&c, None).thm17.applies);

        let c = derive_constants(ModelParams::new(5, 0.2, -1.0).unwrap()).unwrap();
        let r = validate_regime(&c, None);
        assert!(!r.thm15_16.applies);
        assert!(r.thm15_16.violated.unwrap().contains("n in"));

        let c = derive_constants(ModelParams::new(3, 0.3, -1.0).unwrap()).unwrap();
        assert_eq!(validate_regime(&c, None).case_a_vs_b, OriginCase::B);
        assert!(c.delta1 >= 0.0 && c.delta1 < 1.0);
    }

    #[test]
    fn mu_edge_case() {
        // m = 0.2 < 1/2, so mu = mu1 is admissible.
        let c = derive_constants(ModelParams::new(3, 0.2, -1.0).unwrap()).unwrap();
        assert!(validate_regime(&c, Some(c.mu1)).thm13_mu_range.unwrap().applies);
        assert!(!validate_regime(&c, Some(0.0)).thm13_mu_range.unwrap().applies);
        assert!(!validate_regime(&c, Some(0.6)).thm13_mu_range.unwrap().applies);
    }
}
