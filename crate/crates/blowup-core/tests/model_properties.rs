use blowup_core::model::{
    from_similarity_time_left, refined_scale_at, to_similarity_at, Nonlinearity,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// Round trip through similarity variables, measured on the
    /// cancellation-safe pair (r, T - t). Tolerance is driven by the
    /// exp/log round trip, which is accurate to (1 + |s|) ulps.
    #[test]
    fn similarity_roundtrip_exponential(
        r in 0.0..50.0f64,
        time_left in 1e-10..10.0f64,
        u in -30.0..30.0f64,
    ) {
        let nl = Nonlinearity::Exponential;
        let p = to_similarity_at(r, time_left, u, &nl);
        let (r2, tl2, u2) = from_similarity_time_left(&p, &nl).unwrap();
        prop_assert!((r2 - r).abs() <= 1e-14 * (1.0 + r.abs()));
        prop_assert!((tl2 - time_left).abs() <= 1e-14 * time_left);
        prop_assert!((u2 - u).abs() <= 1e-13 * (1.0 + u.abs()));
    }

    #[test]
    fn similarity_roundtrip_power(
        r in 0.0..50.0f64,
        time_left in 1e-10..10.0f64,
        u in 0.0..1e4f64,
        p_exp in 1.5..5.0f64,
    ) {
        let nl = Nonlinearity::power(p_exp).unwrap();
        let pt = to_similarity_at(r, time_left, u, &nl);
        let (r2, tl2, u2) = from_similarity_time_left(&pt, &nl).unwrap();
        prop_assert!((r2 - r).abs() <= 1e-14 * (1.0 + r.abs()));
        prop_assert!((tl2 - time_left).abs() <= 1e-14 * time_left);
        prop_assert!((u2 - u).abs() <= 1e-11 * (1.0 + u.abs()));
    }

    /// s is strictly decreasing in the distance to blow-up (that is,
    /// strictly increasing in t), and y is strictly increasing in r.
    #[test]
    fn similarity_monotonicity(
        tl_a in 1e-9..1.0f64,
        factor in 1.001..100.0f64,
        r in 0.001..10.0f64,
    ) {
        let nl = Nonlinearity::Exponential;
        let tl_b = tl_a / factor; // later time: less time left
        let pa = to_similarity_at(r, tl_a, 0.0, &nl);
        let pb = to_similarity_at(r, tl_b, 0.0, &nl);
        prop_assert!(pb.s > pa.s);
        let q = to_similarity_at(r * 1.5, tl_a, 0.0, &nl);
        prop_assert!(q.y > pa.y);
    }

    /// The refined scale dominates the parabolic scale for the quadratic
    /// degree and matches the pure power for higher degrees.
    #[test]
    fn refined_scale_relations(time_left in 1e-12..1e-2f64) {
        let quad = refined_scale_at(time_left, 2).unwrap();
        prop_assert!(quad > time_left.sqrt());
        let cubic = refined_scale_at(time_left, 3).unwrap();
        prop_assert!((cubic - time_left.powf(1.0 / 3.0)).abs() <= 1e-15 * cubic);
    }
}

#[test]
fn kappa_identity_on_a_dense_sweep() {
    for k in 0..400 {
        let p = 1.01 + 0.02 * k as f64;
        let kappa = Nonlinearity::power(p).unwrap().kappa().unwrap();
        assert!(
            (kappa.powf(p - 1.0) * (p - 1.0) - 1.0).abs() < 1e-12,
            "kappa identity fails at p = {p}"
        );
    }
}
