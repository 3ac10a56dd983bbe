use fde_core::params::{derive_constants, exact_constants, q_to_f64, validate_regime, ModelParams, Q};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// `(n, m, beta)` with `0 < m < (n-2)/n` and `beta < 0`.
fn valid_params() -> impl Strategy<Value = ModelParams> {
    (3u32..=10, 0.001f64..0.999, 0.01f64..10.0).prop_map(|(n, frac, bt)| {
        let mc = (n as f64 - 2.0) / n as f64;
        ModelParams::new(n, frac * mc, -bt).unwrap()
    })
}

/// Exact rationals `m = p/q` in the admissible range.
fn rational_params() -> impl Strategy<Value = (i64, Q, Q)> {
    (3i64..=9, 2i128..=60, 1i128..=40, 1i128..=12).prop_filter_map("m in range", |(n, q, p, b)| {
        let m = Q::new(p, q);
        let mc = Q::new(n as i128 - 2, n as i128);
        (m < mc).then_some((n, m, Q::new(-b, 4)))
    })
}

proptest! {
    #[test]
    fn cross_identities(p in valid_params()) {
        let c = derive_constants(p).unwrap();
        let (n, m) = (p.n as f64, p.m);
        prop_assert!(rel(c.alpha_tilde / c.beta_tilde + 2.0 / (1.0 - m), (n - 2.0) / m) < 1e-13);
        prop_assert!(rel(c.gamma2, (1.0 - m) * c.mu1 / (2.0 * m)) < 1e-13);
        prop_assert!(rel(m * c.gamma3, n * c.beta_tilde / c.alpha_tilde - 1.0) < 1e-13);
        prop_assert!(c.mu1 > 0.0);
        prop_assert!(c.farfield_slope > 0.0 && c.d() > 0.0);
    }

    #[test]
    fn closed_form_gamma3(p in valid_params()) {
        let c = derive_constants(p).unwrap();
        let (n, m) = (p.n as f64, p.m);
        let closed = n * (1.0 - m) / (n - 2.0 - n * m) - 1.0 / m;
        prop_assert!((c.gamma3 - closed).abs() <= 1e-11 * (1.0 + closed.abs()));
    }

    #[test]
    fn float_tracks_exact((n, m, beta) in rational_params()) {
        let e = exact_constants(n, m, beta).unwrap();
        let p = ModelParams::new(n as u32, q_to_f64(&m), q_to_f64(&beta)).unwrap();
        let c = derive_constants(p).unwrap();
        for (x, y) in [
            (c.alpha, &e.alpha), (c.alpha_tilde, &e.alpha_tilde), (c.gamma1, &e.gamma1),
            (c.gamma2, &e.gamma2), (c.gamma3, &e.gamma3), (c.mu1, &e.mu1), (c.a0, &e.a0),
            (c.farfield_slope, &e.farfield_slope), (c.cstar, &e.cstar),
        ] {
            let y = q_to_f64(y);
            prop_assert!((x - y).abs() <= 1e-11 * (1.0 + y.abs()), "{x} vs {y}");
        }
        prop_assert_eq!(c.yamabe_case, e.yamabe_case);
    }

    #[test]
    fn exact_identities_hold_exactly((n, m, beta) in rational_params()) {
        let e = exact_constants(n, m, beta).unwrap();
        let one = Q::from_integer(1);
        let two = Q::from_integer(2);
        let nq = Q::from_integer(n as i128);
        prop_assert_eq!(e.alpha_tilde / e.beta_tilde + two / (one - m), (nq - two) / m);
        prop_assert_eq!(e.gamma2, (one - m) * e.mu1 / (two * m));
        prop_assert_eq!(m * e.gamma3, nq * e.beta_tilde / e.alpha_tilde - one);
    }

    #[test]
    fn regime_flags_agree_with_inequalities(p in valid_params(), frac in 0.01f64..1.2) {
        let c = derive_constants(p).unwrap();
        let (n, m) = (p.n as f64, p.m);
        let mu = frac * c.mu1;
        let r = validate_regime(&c, Some(mu));
        prop_assert_eq!(r.thm13_mu_range.unwrap().applies, mu < c.mu1);
        let thm17 = p.n < 8 && 1.0 - (2.0 / n).sqrt() <= m && m < (2.0 * (n - 2.0) / (3.0 * n)).min((n - 2.0) / (n + 2.0));
        prop_assert_eq!(r.thm17.applies, thm17);
        let thm15 = (p.n == 3 || p.n == 4) && m >= (n - 2.0) / (n + 2.0) && m < (n - 2.0) / n;
        prop_assert_eq!(r.thm15_16.applies, thm15);
    }
}

#[test]
fn invalid_params_are_rejected() {
    assert!(ModelParams::new(2, 0.1, -1.0).is_err());
    assert!(ModelParams::new(3, 1.0 / 3.0, -1.0).is_err());
    assert!(ModelParams::new(3, 0.0, -1.0).is_err());
    assert!(ModelParams::new(3, 0.2, 0.0).is_err());
    assert!(ModelParams::new(3, 0.2, f64::NAN).is_err());
}
