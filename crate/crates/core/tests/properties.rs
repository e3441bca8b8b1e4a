use proptest::prelude::*;
use tlp_core::moments::log_moment;
use tlp_core::simulate::trimmed_sum_at;
use tlp_core::{
    empirical_h, h_fn, h_inverse_fn, ks_statistic, make_limit_law, tail, tail_inverse, JumpSeries, LevyTail,
    LogPowerModel, Model, RngStream, Scheme, SlowTailModel, StableModel,
};

fn models() -> Vec<Model> {
    vec![
        Model::Stable(StableModel::new(0.5).unwrap()),
        Model::Stable(StableModel::new(0.9).unwrap()),
        Model::LogPower(LogPowerModel::new(-1.0).unwrap()),
        Model::LogPower(LogPowerModel::new(-0.3).unwrap()),
        Model::SlowTail(SlowTailModel),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn h_round_trips(gamma in -3.0f64..=0.0, y in -20.0f64..20.0) {
        let x = h_inverse_fn(gamma, y).unwrap();
        let back = h_fn(gamma, x).unwrap();
        // Near the left edge of the support 1 + |γ|x ≈ e^{|γ|y/2}, so rounding x
        // is amplified by e^{-|γ|y/2}.
        let amplification = if gamma < 0.0 { (-gamma * (-y).max(0.0) / 2.0).exp() * 2.0 / -gamma } else { 0.0 };
        let tol = 1e-10 * y.abs().max(1.0) + 4.0 * f64::EPSILON * amplification;
        prop_assert!((back - y).abs() <= tol, "{back} vs {y}");
    }

    #[test]
    fn h_is_increasing(gamma in -3.0f64..=0.0, y1 in -20.0f64..20.0, dy in 1e-3f64..5.0) {
        let x1 = h_inverse_fn(gamma, y1).unwrap();
        let x2 = h_inverse_fn(gamma, y1 + dy).unwrap();
        prop_assert!(x2 > x1);
        prop_assert!(h_fn(gamma, x2).unwrap() > h_fn(gamma, x1).unwrap());
    }

    #[test]
    fn tail_inverse_round_trips(which in 0usize..5, ly in -5.0f64..15.0) {
        let m = &models()[which];
        let y = 10f64.powf(ly);
        let x = tail_inverse(m, y).unwrap();
        prop_assume!(x > 0.0 && x.is_finite());
        let back = tail(m, x).unwrap();
        prop_assert!((back - y).abs() <= 1e-9 * y, "{}: {back} vs {y}", m.label());
    }

    #[test]
    fn tail_is_non_increasing(which in 0usize..5, lx in -30.0f64..3.0, step in 1e-6f64..2.0) {
        let m = &models()[which];
        let (x1, x2) = (10f64.powf(lx), 10f64.powf(lx + step));
        prop_assert!(tail(m, x2).unwrap() <= tail(m, x1).unwrap());
    }

    #[test]
    fn empirical_h_is_monotone_in_x(which in 0usize..5, r in 10.0f64..1e6, x in -0.2f64..3.0, dx in 1e-3f64..1.0) {
        let m = &models()[which];
        let h1 = empirical_h(m, r, x);
        let h2 = empirical_h(m, r, x + dx);
        if let (Ok(h1), Ok(h2)) = (h1, h2) {
            prop_assert!(h2 >= h1, "{}: {h1} > {h2}", m.label());
        }
    }

    #[test]
    fn truncated_moments_increase_in_t(which in 0usize..5, lt in -40.0f64..-0.5, dlt in 0.01f64..5.0, p in prop_oneof![Just(1.0), Just(2.0)]) {
        let m = &models()[which];
        let hi = (lt + dlt).min(m.log_support_edge() - 1e-3);
        prop_assume!(hi > lt);
        let a = log_moment(m, p, lt).unwrap();
        let b = log_moment(m, p, hi).unwrap();
        prop_assert!(b > a, "{}: {a} vs {b}", m.label());
    }

    #[test]
    fn ks_lies_in_the_unit_interval(mut xs in prop::collection::vec(-10.0f64..10.0, 1..200)) {
        xs.sort_by(f64::total_cmp);
        let law = make_limit_law(Scheme::DeltaOnly, 0.0, None, 1.0).unwrap();
        let d = ks_statistic(&xs, |x| law.marginal_cdf(1, x).unwrap()).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-12);
    }

    #[test]
    fn trimmed_sums_shrink_with_r(seed in any::<u64>(), r in 1usize..40) {
        let m = StableModel::new(0.5).unwrap();
        let series = JumpSeries::generate(&m, 1.0, RngStream::new(seed, 0), 400).unwrap();
        prop_assert!(trimmed_sum_at(&series, r, 400) <= trimmed_sum_at(&series, r - 1, 400));
        prop_assert!(series.delta(r + 1) <= series.delta(r));
    }
}
