//! Seeded random instances for tests, benchmarks and the acceptance suite.
//!
//! All values are small rationals so the same instance can be run exactly or
//! converted to `f64` with [`Scenario::to_float`].

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::CurveParams;
use crate::exchange::{MarketContext, Owner, PoolState, Side, Transaction};
use crate::scalar::Scalar;
use crate::scenario::Scenario;

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::from_ratio(num, den)
}

/// Ranges for [`random_centered`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub fee: BigRational,
    /// Largest trade as a fraction of the sold reserve, in thousandths.
    pub max_trade_permille: i64,
}

impl GenParams {
    pub fn new(n: usize, fee: BigRational) -> Self {
        Self {
            n,
            fee,
            max_trade_permille: 400,
        }
    }
}

/// A centered constant-product pool with random prices and `n` user
/// transactions of random side and size.
///
/// `x0` is an integer in `[50, 500]` and `p_x / p_y` a ratio of integers in
/// `[1, 9]`, so `k = x0^2 p_x / p_y` keeps the start centered and the
/// arbitrage bounds rational whenever `sqrt(1 - fee)` is.
pub fn random_centered(rng: &mut GenRng, params: &GenParams) -> Scenario<BigRational> {
    let x0 = ratio(rng.random_range(50..=500), 1);
    let p_x = ratio(rng.random_range(1..=9), rng.random_range(1..=9));
    let p_y = ratio(rng.random_range(1..=9), rng.random_range(1..=9));
    let k = x0.clone() * x0.clone() * p_x.clone() / p_y.clone();
    let curve = CurveParams::constant_product(k).expect("positive constant");
    let s0 = PoolState::at_x(&curve, x0).expect("positive reserve");
    let market = MarketContext::new(p_x, p_y, params.fee.clone()).expect("valid market");
    let transactions = (0..params.n)
        .map(|i| random_user_tx(rng, &s0, i as u32 + 1, params.max_trade_permille))
        .collect();
    Scenario {
        curve,
        initial_state: s0,
        market,
        transactions,
    }
}

/// A user sale of between 0.1% and `max_permille`/1000 of the sold reserve.
pub fn random_user_tx(
    rng: &mut GenRng,
    s0: &PoolState<BigRational>,
    user: u32,
    max_permille: i64,
) -> Transaction<BigRational> {
    let side = if rng.random_bool(0.5) {
        Side::SellX
    } else {
        Side::SellY
    };
    let reserve = match side {
        Side::SellX => &s0.x,
        Side::SellY => &s0.y,
    };
    let qty = reserve.clone() * ratio(rng.random_range(1..=max_permille.max(1)), 1000);
    Transaction::new(side, qty, Owner::User(user)).expect("positive quantity")
}

/// A point on `curve` with X reserves between a third of and three times
/// `x0`.
pub fn random_state_near(
    rng: &mut GenRng,
    curve: &CurveParams<BigRational>,
    x0: &BigRational,
) -> PoolState<BigRational> {
    let factor = ratio(rng.random_range(334..=3000), 1000);
    PoolState::at_x(curve, x0.clone() * factor).expect("positive reserve")
}

/// A random sequence over `alphabet` of length `len`, as indices.
pub fn random_word(rng: &mut GenRng, alphabet: usize, len: usize) -> Vec<usize> {
    (0..len).map(|_| rng.random_range(0..alphabet)).collect()
}

/// `n` integers drawn uniformly from `[lo, hi]`.
pub fn random_multiset(rng: &mut GenRng, n: usize, lo: u64, hi: u64) -> Vec<u64> {
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}
