//! Fixtures shared by the benchmarks.

use gsrmev_core::{CurveParams, MarketContext, Owner, PoolState, Scalar, Transaction};

/// A centered pool with `k = 10^4` at unit prices and the given fee.
pub fn unit_pool<S: Scalar>(fee: S) -> (PoolState<S>, CurveParams<S>, MarketContext<S>) {
    let curve = CurveParams::constant_product(S::from_i64(10_000)).expect("positive constant");
    let s0 = PoolState::new(S::from_i64(100), S::from_i64(100));
    let market = MarketContext::new(S::one(), S::one(), fee).expect("valid market");
    (s0, curve, market)
}

/// `n` user transactions alternating between the two sides with slowly
/// growing quantities.
pub fn alternating_users<S: Scalar>(n: usize) -> Vec<Transaction<S>> {
    (0..n)
        .map(|i| {
            let qty = S::from_ratio(3 + i as i64, 2);
            let owner = Owner::User(i as u32 + 1);
            if i % 2 == 0 {
                Transaction::sell_x(qty, owner)
            } else {
                Transaction::sell_y(qty, owner)
            }
            .expect("positive quantity")
        })
        .collect()
}
