//! Independent oracles shared by the integration tests. Nothing here calls
//! into the engine's execution or verification code.

#![allow(dead_code)]

use std::collections::HashSet;

use gsrmev_core::{Side, Transaction};
use num_rational::BigRational;
use num_traits::One;

/// Direct reading of the sequencing rule on a constant-product pool
/// `x * y = k`, quadratic in the sequence length. Returns the first
/// violating 1-based position.
pub fn reference_gsr(
    x0: &BigRational,
    k: &BigRational,
    fee: &BigRational,
    txs: &[Transaction<BigRational>],
) -> Option<usize> {
    let y0 = k / x0;
    let retained = BigRational::one() - fee;
    let (mut x, mut y) = (x0.clone(), y0.clone());
    for (i, tx) in txs.iter().enumerate() {
        let later_same = txs[i + 1..].iter().all(|t| t.side() == tx.side());
        let direction_ok = match tx.side() {
            Side::SellX => x <= *x0,
            Side::SellY => y <= y0,
        };
        if !direction_ok && !later_same {
            return Some(i + 1);
        }
        match tx.side() {
            Side::SellX => {
                x += &retained * tx.quantity();
                y = k / &x;
            }
            Side::SellY => {
                y += &retained * tx.quantity();
                x = k / &y;
            }
        }
    }
    None
}

/// Whether some sub-multiset of `values` sums to exactly half the total,
/// by meet in the middle.
pub fn has_partition(values: &[u64]) -> bool {
    let total: u64 = values.iter().sum();
    if total % 2 == 1 {
        return false;
    }
    let target = total / 2;
    let (left, right) = values.split_at(values.len() / 2);
    let sums = |half: &[u64]| -> HashSet<u64> {
        let mut out = HashSet::from([0u64]);
        for &v in half {
            let next: Vec<u64> = out.iter().map(|s| s + v).collect();
            out.extend(next);
        }
        out
    };
    let right_sums = sums(right);
    sums(left)
        .into_iter()
        .any(|s| s <= target && right_sums.contains(&(target - s)))
}

/// Value of a single sale of `q` at pool `(x, k / x)`, in f64, from the
/// constant-product formulas alone.
pub fn single_trade_value(x: f64, k: f64, fee: f64, p_x: f64, p_y: f64, side: Side, q: f64) -> f64 {
    let y = k / x;
    match side {
        Side::SellX => {
            let received = y - k / (x + (1.0 - fee) * q);
            received * p_y - q * p_x
        }
        Side::SellY => {
            let received = x - k / (y + (1.0 - fee) * q);
            received * p_x - q * p_y
        }
    }
}

/// `count` log-spaced quantities between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
