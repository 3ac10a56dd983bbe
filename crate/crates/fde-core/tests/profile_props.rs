use fde_core::asymptotics::{bracket, Order};
use fde_core::profile::{check_invariants, Profile, ProfileRequest};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn invariants_hold_across_parameters(
        n in 3u32..=5,
        frac in 0.2f64..0.9,
        eta in 0.5f64..3.0,
        bt in 0.3f64..2.0,
    ) {
        let m = frac * (n as f64 - 2.0) / n as f64;
        let mut req = ProfileRequest::with_beta_tilde(n, m, bt, eta).unwrap();
        req.s_max = 60.0;
        let p = Profile::compute(req).unwrap();
        let inv = check_invariants(&p);
        prop_assert!(inv.all_pass(1e-8), "{inv:?}");
    }

    #[test]
    fn higher_orders_only_add_terms(ell in 5.0f64..500.0, constant in -5.0f64..5.0, a3 in -5.0f64..5.0, loglog in -2.0f64..2.0) {
        let lead = bracket(ell, constant, a3, loglog, Order::Leading);
        let ll = bracket(ell, constant, a3, loglog, Order::Loglog);
        let cst = bracket(ell, constant, a3, loglog, Order::Constant);
        let full = bracket(ell, constant, a3, loglog, Order::OneOverLog);
        let tol = 1e-12 * (1.0 + ell);
        prop_assert_eq!(lead, ell);
        prop_assert!((ll - lead - loglog * ell.ln()).abs() < tol);
        prop_assert!((cst - ll - constant).abs() < tol);
        prop_assert!((full - cst - (a3 + loglog * loglog * ell.ln()) / ell).abs() < tol);
    }
}
