use gsrmev_core::{check_axioms, Curve, CurveParams};
use proptest::prelude::*;

fn pool(k: f64) -> CurveParams<f64> {
    CurveParams::constant_product(k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn reserve_round_trip(x in 1.0f64..1e6, k in 1.0f64..1e8) {
        let c = pool(k);
        let back = c.reserve_x(&c.reserve_y(&x).unwrap()).unwrap();
        prop_assert!((back - x).abs() <= 1e-12 * x, "x = {x}, back = {back}");
    }

    #[test]
    fn y_falls_and_rate_falls_as_x_grows(a in 1.0f64..1e6, gap in 1e-3f64..1e6) {
        let b = a + gap;
        let c = pool(1e4);
        prop_assert!(c.reserve_y(&a).unwrap() > c.reserve_y(&b).unwrap());
        prop_assert!(c.marginal_rate(&a).unwrap() > c.marginal_rate(&b).unwrap());
    }
}

proptest! {
    #[test]
    fn slope_matches_rate(x in 1.0f64..1e6, k in 1.0f64..1e8) {
        let c = pool(k);
        let h = 1e-6 * x;
        let slope = (c.reserve_y(&(x + h)).unwrap() - c.reserve_y(&(x - h)).unwrap()) / (2.0 * h);
        let r = c.marginal_rate(&x).unwrap();
        prop_assert!(((slope + r) / r).abs() <= 1e-6);
    }

    #[test]
    fn solve_rate_inverts_rate(x in 1.0f64..1e6) {
        let c = pool(1e4);
        let r = c.marginal_rate(&x).unwrap();
        let solved = c.solve_rate(&r).unwrap();
        prop_assert!((solved - x).abs() <= 1e-9 * x);
    }
}

#[test]
fn axioms_on_wide_grid() {
    let report = check_axioms(&pool(1e4), &1.0, &1e6, 10_000).unwrap();
    assert!(report.passed());
    assert!(report.max_derivative_rel_err <= 1e-6);
}

#[test]
fn non_positive_inputs_are_rejected() {
    let c = pool(1e4);
    assert!(c.reserve_y(&0.0).is_err());
    assert!(c.reserve_x(&-1.0).is_err());
    assert!(c.marginal_rate(&0.0).is_err());
    assert!(CurveParams::constant_product(0.0).is_err());
}
