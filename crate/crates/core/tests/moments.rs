use mrc_outage::exec::Execution;
use mrc_outage::fading::EtaMuParams;
use mrc_outage::moments::{
    aggregate_fit, cross_moment_1, cross_moment_2, per_interferer_fit, user_norm_moments,
    GammaFit, Scenario,
};
use mrc_outage::montecarlo::estimate_moments;
use proptest::prelude::*;

fn params() -> impl Strategy<Value = EtaMuParams> {
    (-0.9..0.9f64, 0.3..4.0f64, 0.2..3.0f64).prop_map(|(e, m, o)| EtaMuParams::new(e, m, o).unwrap())
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..5, params(), params(), prop::collection::vec(-10.0..3.0f64, 1..6))
        .prop_map(|(n_r, u, i, e)| Scenario::from_db(n_r, u, i, &e).unwrap())
}

proptest! {
    #[test]
    fn aggregate_preserves_first_two_moments(s in scenario()) {
        let fit = GammaFit::from_scenario(&s).unwrap();
        let (m1, m2) = user_norm_moments(&s);
        let mean: f64 = (0..s.n_i()).map(|i| cross_moment_1(&s, i).unwrap() / m1).sum();
        let var: f64 = (0..s.n_i())
            .map(|i| {
                let mu = cross_moment_1(&s, i).unwrap() / m1;
                cross_moment_2(&s, i).unwrap() / m2 - mu * mu
            })
            .sum();
        let agg = fit.aggregate;
        prop_assert!((agg.shape * agg.scale - mean).abs() <= 1e-12 * mean);
        prop_assert!((agg.shape * agg.scale * agg.scale - var).abs() <= 1e-12 * var);
    }

    #[test]
    fn per_interferer_fit_matches_moment_ratios(s in scenario()) {
        let (m1, m2) = user_norm_moments(&s);
        for i in 0..s.n_i() {
            let g = per_interferer_fit(&s, i).unwrap();
            let r1 = cross_moment_1(&s, i).unwrap() / m1;
            let r2 = cross_moment_2(&s, i).unwrap() / m2;
            prop_assert!((g.shape * g.scale - r1).abs() <= 1e-12 * r1);
            prop_assert!((g.shape * (g.shape + 1.0) * g.scale * g.scale - r2).abs() <= 1e-12 * r2);
        }
    }

    #[test]
    fn rayleigh_interferers_give_unit_shape(u in params(), n_r in 1usize..6, e in -10.0..5.0f64) {
        let s = Scenario::from_db(n_r, u, EtaMuParams::rayleigh(1.3).unwrap(), &[e]).unwrap();
        let g = per_interferer_fit(&s, 0).unwrap();
        prop_assert!((g.shape - 1.0).abs() <= 1e-10, "{}", g.shape);
    }

    #[test]
    fn aggregate_ignores_interferer_order(s in scenario()) {
        let fit = GammaFit::from_scenario(&s).unwrap();
        let mut rev = fit.per_interferer.clone();
        rev.reverse();
        let a = aggregate_fit(&rev).unwrap();
        prop_assert!((a.shape - fit.aggregate.shape).abs() <= 1e-13 * a.shape);
        prop_assert!((a.scale - fit.aggregate.scale).abs() <= 1e-13 * a.scale);
    }

    #[test]
    fn approx2_user_fit_matches_user_moments(s in scenario()) {
        let fit = GammaFit::from_scenario(&s).unwrap();
        let (m1, m2) = user_norm_moments(&s);
        let (p, q) = (fit.user.shape, fit.user.scale);
        prop_assert!((p * q - m1).abs() <= 1e-12 * m1);
        prop_assert!((p * (p + 1.0) * q * q - m2).abs() <= 1e-12 * m2);
    }
}

#[test]
fn closed_forms_agree_with_simulation() {
    let cases = [
        (3, (0.1, 2.0, 1.0), (0.3, 2.0, 1.0), vec![-1.0, -3.0]),
        (1, (-0.6, 0.7, 2.0), (0.8, 1.5, 0.5), vec![0.0]),
        (4, (0.0, 0.5, 1.0), (0.0, 0.5, 1.0), vec![-2.0, -4.0, -6.0]),
    ];
    for (n_r, u, i, e) in cases {
        let s = Scenario::from_db(
            n_r,
            EtaMuParams::new(u.0, u.1, u.2).unwrap(),
            EtaMuParams::new(i.0, i.1, i.2).unwrap(),
            &e,
        )
        .unwrap();
        let est = estimate_moments(&s, 1_000_000, 9, Execution::Parallel).unwrap();
        let (m1, m2) = user_norm_moments(&s);
        assert!((est.user.0 / m1 - 1.0).abs() < 0.01);
        assert!((est.user.1 / m2 - 1.0).abs() < 0.02);
        for k in 0..s.n_i() {
            let c1 = cross_moment_1(&s, k).unwrap();
            let c2 = cross_moment_2(&s, k).unwrap();
            assert!((est.cross[k].0 / c1 - 1.0).abs() < 0.01, "{:?} vs {c1}", est.cross[k]);
            assert!((est.cross[k].1 / c2 - 1.0).abs() < 0.02, "{:?} vs {c2}", est.cross[k]);
        }
    }
}

#[test]
fn out_of_range_interferer_index() {
    let r = EtaMuParams::rayleigh(1.0).unwrap();
    let s = Scenario::new(2, r, r, vec![1.0]).unwrap();
    assert!(cross_moment_1(&s, 1).is_err());
    assert!(cross_moment_2(&s, 3).is_err());
}
