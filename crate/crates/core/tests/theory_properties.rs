use collapse_lab::spectra::DiscreteMeasure;
use collapse_lab::stieltjes::solve_m;
use collapse_lab::theory::{
    optimal_w, ridge_limit_risk, snr_monotonicity_check, LimitModel, MixingWeight, ModelParams, RidgePath,
};
use proptest::prelude::*;

fn two_atom() -> DiscreteMeasure {
    DiscreteMeasure::new([(0.5, 0.5), (2.0, 0.5)]).unwrap()
}

fn generic_equivalent(path: &RidgePath, params: &ModelParams) -> RidgePath {
    let m = path.limit_model(params).unwrap();
    RidgePath::Generic { h: m.h, g: m.g }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stieltjes_residual_is_small(
        locs in proptest::collection::vec(0.05f64..8.0, 1..6),
        gamma in 0.2f64..6.0,
        z in -50.0f64..-1e-3,
    ) {
        let h = DiscreteMeasure::new(locs.iter().map(|&x| (x, 1.0))).unwrap();
        let s = solve_m(z, &h, gamma).unwrap();
        let lhs = 1.0 / s.m + z;
        let rhs = gamma * h.integrate(|x| x / (1.0 + s.m * x));
        prop_assert!(s.m > 0.0);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 / s.m).max(1.0));
    }

    #[test]
    fn formulas_agree_with_the_generic_path(
        w in 0.02f64..0.98,
        lambda in 1e-3f64..1e3,
        gamma in 1.1f64..5.0,
        sigma2 in 0.1f64..10.0,
        theta in -1.0f64..1.0,
    ) {
        let params = ModelParams { gamma, sigma2, bstar: 1.0 };
        let w = MixingWeight::new(w).unwrap();
        for path in [
            RidgePath::Isotropic { alpha: 1.0 },
            RidgePath::RandomEffects { h: two_atom() },
            RidgePath::Spiked { strength: 5.0, theta },
        ] {
            let a = path.ridge_risk(&params, w, lambda).unwrap();
            let b = generic_equivalent(&path, &params).ridge_risk(&params, w, lambda).unwrap();
            for (x, y) in [(a.bias, b.bias), (a.variance, b.variance), (a.total, b.total)] {
                prop_assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-3), "{path:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn decomposition_is_consistent_and_nonnegative(
        w in 0.0f64..=1.0,
        lambda in 0.0f64..100.0,
        gamma in 1.05f64..5.0,
    ) {
        let params = ModelParams { gamma, sigma2: 1.0, bstar: 2.0 };
        let w = MixingWeight::new(w).unwrap();
        for path in [RidgePath::Isotropic { alpha: 2.0 }, RidgePath::RandomEffects { h: two_atom() }] {
            let r = path.risk(&params, w, lambda).unwrap();
            prop_assert!(r.bias >= 0.0 && r.variance >= 0.0);
            prop_assert!((r.bias + r.variance - r.total).abs() <= 1e-12 * r.total.max(1.0));
        }
    }

    #[test]
    fn optimal_weight_is_at_least_half(
        lambda in 1e-3f64..1e3,
        snr in 0.01f64..100.0,
        gamma in 1.1f64..5.0,
    ) {
        let params = ModelParams { gamma, sigma2: 1.0 / snr, bstar: 1.0 };
        for path in [
            RidgePath::Isotropic { alpha: 1.0 },
            RidgePath::RandomEffects { h: two_atom() },
            RidgePath::Spiked { strength: 5.0, theta: 0.5 },
        ] {
            let best = optimal_w(|w| Ok(path.ridge_risk(&params, w, lambda)?.total)).unwrap();
            prop_assert!(best.w >= 0.5 - 1e-5 && best.w <= 1.0, "{path:?}: {}", best.w);
        }
    }
}

#[test]
fn bias_decreases_in_w() {
    let params = ModelParams { gamma: 2.0, sigma2: 1.0, bstar: 1.0 };
    for path in [RidgePath::RandomEffects { h: two_atom() }, RidgePath::Spiked { strength: 5.0, theta: 0.5 }] {
        for lambda in [0.01, 1.0, 10.0] {
            let biases: Vec<f64> = (1..200)
                .map(|k| path.ridge_risk(&params, MixingWeight::new(k as f64 / 200.0).unwrap(), lambda).unwrap().bias)
                .collect();
            assert!(biases.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-12)), "{path:?} λ = {lambda}");
        }
    }
}

#[test]
fn ridge_tends_to_interpolator() {
    let params = ModelParams { gamma: 2.0, sigma2: 1.0, bstar: 1.0 };
    for path in [
        RidgePath::Isotropic { alpha: 1.0 },
        RidgePath::RandomEffects { h: two_atom() },
        RidgePath::Spiked { strength: 5.0, theta: 0.5 },
    ] {
        for w in [0.3, 0.618, 0.9] {
            let w = MixingWeight::new(w).unwrap();
            let ridge = path.ridge_risk(&params, w, 1e-6).unwrap();
            let interp = path.risk(&params, w, 0.0).unwrap();
            assert!((ridge.variance - interp.variance).abs() / interp.variance <= 1e-3, "{path:?}");
            assert!((ridge.total - interp.total).abs() / interp.total <= 1e-3, "{path:?}");
        }
    }
}

#[test]
fn snr_duplicates_are_identical_and_extremes_order() {
    let path = RidgePath::Isotropic { alpha: 1.0 };
    let check = snr_monotonicity_check(&path, 2.0, 1.0, 1.0, &[1.0, 1.0, 1e3]).unwrap();
    assert_eq!(check.points[0], check.points[1]);
    assert!(check.points[2].1 > check.points[0].1);
    assert!(check.monotone);
}

#[test]
fn generic_limit_model_rejects_bad_inputs() {
    let h = two_atom();
    assert!(LimitModel::new(h.clone(), h.clone(), 0.9, 1.0, 1.0).is_err());
    let m = LimitModel::new(h.clone(), h, 2.0, 1.0, 1.0).unwrap();
    assert!(ridge_limit_risk(&m, MixingWeight::new(0.5).unwrap(), -1.0).is_err());
}
