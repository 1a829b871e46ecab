mod common;

use common::{has_partition, rat};
use gsrmev_core::gen::{random_centered, rng, GenParams};
use gsrmev_core::{
    brute_force_optimal, miner_profit, optimal_f0, solve_partition_via_mev, standalone_receipt,
    upper_bound_m, user_receipts, verify_gsr, Owner, SearchConfig,
};
use num_rational::BigRational;
use proptest::prelude::*;

type Q = BigRational;

fn config(threads: usize) -> SearchConfig<Q> {
    SearchConfig {
        threads,
        ..SearchConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fee_free_optimum_reaches_the_bound(seed in any::<u64>(), n in 0usize..12) {
        let s = random_centered(&mut rng(seed), &GenParams::new(n, rat(0, 1)));
        let strategy = optimal_f0(&s.initial_state, &s.transactions, &s.curve, &s.market).unwrap();
        let m = upper_bound_m(&s.initial_state, &s.transactions, &s.curve, &s.market).unwrap();
        prop_assert_eq!(&strategy.declared_profit, &m);

        let trace = strategy.replay(&s.initial_state, &s.curve, &s.market).unwrap();
        prop_assert_eq!(miner_profit(&trace, &s.market), m);
        prop_assert_eq!(trace.final_state(), &s.initial_state);
        prop_assert!(verify_gsr(&s.initial_state, &strategy.sequence, &s.curve, s.market.fee()).unwrap().valid);

        // Every user is served, at the price they would get alone.
        prop_assert_eq!(strategy.chosen_subset.len(), n);
        let receipts = user_receipts(&trace);
        for tx in &s.transactions {
            let Owner::User(id) = tx.owner() else { unreachable!() };
            let alone = standalone_receipt(&s.initial_state, tx, &s.curve, s.market.fee()).unwrap();
            prop_assert_eq!(&receipts[&id][0].1, &alone);
        }
    }

    #[test]
    fn search_never_beats_the_bound(seed in any::<u64>(), n in 0usize..5) {
        let s = random_centered(&mut rng(seed), &GenParams::new(n, rat(19, 100)));
        let best = brute_force_optimal(&s.initial_state, &s.transactions, &s.curve, &s.market, &config(1)).unwrap();
        let m = upper_bound_m(&s.initial_state, &s.transactions, &s.curve, &s.market).unwrap();
        prop_assert!(best.declared_profit >= rat(0, 1));
        prop_assert!(best.declared_profit <= m);
        let trace = best.replay(&s.initial_state, &s.curve, &s.market).unwrap();
        prop_assert_eq!(miner_profit(&trace, &s.market), best.declared_profit.clone());
        prop_assert!(verify_gsr(&s.initial_state, &best.sequence, &s.curve, s.market.fee()).unwrap().valid);
    }

    #[test]
    fn search_is_deterministic_across_threads(seed in any::<u64>(), n in 1usize..6) {
        let s = random_centered(&mut rng(seed), &GenParams::new(n, rat(9, 25)));
        let run = |threads| {
            brute_force_optimal(&s.initial_state, &s.transactions, &s.curve, &s.market, &config(threads)).unwrap()
        };
        let single = run(1);
        prop_assert_eq!(&single, &run(1));
        prop_assert_eq!(&single, &run(4));
    }

    #[test]
    fn reduction_agrees_with_direct_partition(values in prop::collection::vec(1u64..10, 1..6)) {
        let subset = solve_partition_via_mev(&values, rat(19, 100), &config(2)).unwrap();
        prop_assert_eq!(subset.is_some(), has_partition(&values));
        if let Some(subset) = subset {
            let half: u64 = subset.iter().map(|&i| values[i]).sum();
            prop_assert_eq!(2 * half, values.iter().sum::<u64>());
        }
    }
}

#[test]
fn partition_oracle_sanity() {
    assert!(has_partition(&[1, 2, 3]));
    assert!(!has_partition(&[1, 1, 3]));
    assert!(!has_partition(&[1, 2, 2]));
    assert!(has_partition(&[]));
}
