mod common;

use common::rat;
use gsrmev_core::{
    apply_tx, arb_bounds, arbitragable_profit, execute_sequence, greedy_order, miner_profit,
    optimal_single_arb, potential, potential_trace, recenter, CurveParams, MarketContext, Owner,
    PoolState, Side, TieBreak, Transaction,
};
use num_rational::BigRational;
use proptest::prelude::*;

type Q = BigRational;

/// Centered pool at x0 = y0 = 100 with unit prices.
fn exact_setup(fee: Q) -> (PoolState<Q>, CurveParams<Q>, MarketContext<Q>) {
    (
        PoolState::new(rat(100, 1), rat(100, 1)),
        CurveParams::constant_product(rat(10_000, 1)).unwrap(),
        MarketContext::new(rat(1, 1), rat(1, 1), fee).unwrap(),
    )
}

fn fee() -> impl Strategy<Value = Q> {
    prop_oneof![
        Just(rat(0, 1)),
        Just(rat(19, 100)),
        Just(rat(9, 25)),
        Just(rat(51, 100))
    ]
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::SellX), Just(Side::SellY)]
}

proptest! {
    #[test]
    fn ap_is_monotone_and_vanishes_inside(fee in fee(), side in side(), a in 1i64..2000, b in 1i64..2000) {
        let (s0, curve, market) = exact_setup(fee);
        let bounds = arb_bounds(&curve, &market).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let ap = |n: i64| {
            let tx = Transaction::new(side, rat(n, 8), Owner::User(1)).unwrap();
            arbitragable_profit(&s0, &tx, &curve, &market).unwrap()
        };
        let (small, large) = (ap(lo), ap(hi));
        prop_assert!(small >= rat(0, 1));
        prop_assert!(large >= small);

        let inflow = market.retained() * rat(lo, 8);
        let stays_inside = match side {
            Side::SellX => s0.x.clone() + inflow <= bounds.upper,
            Side::SellY => curve_x(&curve, &(s0.y.clone() + inflow)) >= bounds.lower,
        };
        if stays_inside {
            prop_assert_eq!(small, rat(0, 1));
        }
    }

    #[test]
    fn ap_equals_potential_after_the_trade(fee in fee(), side in side(), n in 1i64..4000) {
        let (s0, curve, market) = exact_setup(fee);
        let tx = Transaction::new(side, rat(n, 8), Owner::User(1)).unwrap();
        let (after, _) = apply_tx(&s0, &tx, &curve, market.fee()).unwrap();
        let ap = arbitragable_profit(&s0, &tx, &curve, &market).unwrap();
        prop_assert_eq!(ap, potential(&after, &curve, &market).unwrap());
    }

    #[test]
    fn single_arbitrage_is_optimal(
        fee in 0.0f64..0.4,
        ratio in 0.2f64..5.0,
        alt in 0.01f64..3.0,
    ) {
        let curve = CurveParams::constant_product(1e4).unwrap();
        let market = MarketContext::new(1.0, 1.0, fee).unwrap();
        let state = PoolState::at_x(&curve, 100.0 * ratio).unwrap();
        let bounds = arb_bounds(&curve, &market).unwrap();
        match optimal_single_arb(&state, &curve, &market).unwrap() {
            None => prop_assert!(bounds.contains(&state.x)),
            Some((tx, profit)) => {
                prop_assert!(!bounds.contains(&state.x));
                prop_assert!(profit > 0.0);
                let landed = recenter(&state, &curve, &market).unwrap();
                prop_assert!((landed.x - bounds.lower).abs() < 1e-9 || (landed.x - bounds.upper).abs() < 1e-9);
                // Any other size on the same side does no better.
                let other = Transaction::new(tx.side(), tx.quantity() * alt, Owner::Miner).unwrap();
                let trace = execute_sequence(&state, &[other], &curve, &market).unwrap();
                prop_assert!(miner_profit(&trace, &market) <= profit + 1e-9);
            }
        }
    }

    #[test]
    fn potential_bound_along_valid_traces(
        fee in fee(),
        steps in prop::collection::vec((side(), 1i64..1600, any::<bool>()), 0..10),
    ) {
        let (s0, curve, market) = exact_setup(fee);
        let txs: Vec<_> = steps
            .into_iter()
            .enumerate()
            .map(|(i, (side, n, miner))| {
                let owner = if miner { Owner::Miner } else { Owner::User(i as u32) };
                Transaction::new(side, rat(n, 8), owner).unwrap()
            })
            .collect();
        let ordered = greedy_order(&s0, &txs, &curve, market.fee(), TieBreak::InputOrder).unwrap();
        let trace = execute_sequence(&s0, &ordered, &curve, &market).unwrap();
        let p = potential_trace(&trace, &curve, &market).unwrap();
        prop_assert_eq!(p.first_violation(&trace, &rat(0, 1)), None);
    }
}

fn curve_x(curve: &CurveParams<Q>, y: &Q) -> Q {
    use gsrmev_core::Curve;
    curve.reserve_x(y).unwrap()
}
