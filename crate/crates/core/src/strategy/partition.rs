//! Reduction from Partition to "can the miner earn exactly `M`?".
//!
//! For integers `a_1..a_n` with half-sum `t`, the generated pool is a
//! centered constant-product pool whose lower arbitrage bound sits exactly
//! `(1 - f) t` below `x0`. Users sell `a_i` units of X each, plus two
//! identical large Y sales. Each Y sale is worth a full back-run only if it
//! executes at `x0`, and after the first back-run parks the pool at `L_x`
//! the only way back to `x0` is a set of X sales summing to exactly `t`.

use super::search::{achieves_upper_bound, Decision, SearchConfig};
use crate::arbitrage::arb_bounds;
use crate::curve::{Curve, CurveParams};
use crate::error::{Error, Result};
use crate::exchange::{MarketContext, Owner, PoolState, Transaction};
use crate::scalar::{approx_eq, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionInstance<S> {
    pub integers: Vec<u64>,
    /// `t = sum(a_i) / 2`.
    pub half_sum: S,
    /// Quantity of each of the two Y sales.
    pub q_star: S,
    pub curve: CurveParams<S>,
    pub s0: PoolState<S>,
    pub market: MarketContext<S>,
    /// `SellX(a_i)` for each `i` in order, then the two `SellY(q_star)`.
    pub transactions: Vec<Transaction<S>>,
}

impl<S: Scalar> PartitionInstance<S> {
    /// Indices of the two Y sales in `transactions`.
    pub fn sell_y_indices(&self) -> (usize, usize) {
        let n = self.integers.len();
        (n, n + 1)
    }
}

fn total(integers: &[u64]) -> Result<u64> {
    integers
        .iter()
        .try_fold(0u64, |acc, &a| acc.checked_add(a))
        .filter(|&sum| sum <= i64::MAX as u64)
        .ok_or_else(|| Error::invalid("integers", "sum is too large"))
}

/// Index of the first integer larger than the half-sum. Such an instance has
/// no balanced partition.
fn oversized(integers: &[u64]) -> Result<Option<usize>> {
    let total = total(integers)?;
    // a_i > total / 2  <=>  2 a_i > total
    Ok(integers
        .iter()
        .position(|&a| 2 * (a as u128) > total as u128))
}

pub fn gen_partition_instance<S: Scalar>(
    integers: &[u64],
    fee: S,
    p_x: S,
    p_y: S,
) -> Result<PartitionInstance<S>> {
    if integers.is_empty() {
        return Err(Error::invalid("integers", "need at least one integer"));
    }
    if integers.contains(&0) {
        return Err(Error::invalid("integers", "integers must be positive"));
    }
    if let Some(i) = oversized(integers)? {
        return Err(Error::invalid(
            "integers",
            format!("a_{} = {} exceeds half the sum", i + 1, integers[i]),
        ));
    }
    if fee.is_zero() {
        return Err(Error::domain("the reduction needs a positive fee"));
    }
    let market = MarketContext::new(p_x, p_y, fee)?;
    let retained = market.retained();
    let root = retained
        .sqrt()
        .ok_or_else(|| Error::Irrational(format!("sqrt(1 - {})", market.fee().render())))?;

    let total = total(integers)?;
    let t = S::from_i64(total as i64) / S::from_i64(2);
    // x0 - L_x = (1 - sqrt(1 - f)) x0 must equal (1 - f) t.
    let x0 = retained.clone() * t.clone() / (S::one() - root);
    let k = x0.clone() * x0.clone() * market.price_ratio();
    let curve = CurveParams::constant_product(k)?;
    let s0 = PoolState::at_x(&curve, x0.clone())?;

    let bounds = arb_bounds(&curve, &market)?;
    let gap = x0.clone() - bounds.lower.clone();
    if !approx_eq(&gap, &(retained.clone() * t.clone()), 1e-12) {
        return Err(Error::Internal(format!(
            "x0 - L_x = {} but (1 - f) t = {}",
            gap.render(),
            (retained * t).render()
        )));
    }

    // Smallest Y sale that reaches L_x, plus 20% so it ends strictly below.
    let threshold = (curve.reserve_y(&bounds.lower)? - s0.y.clone()) / retained;
    let q_star = threshold * S::from_ratio(6, 5);

    let mut transactions = Vec::with_capacity(integers.len() + 2);
    for (i, &a) in integers.iter().enumerate() {
        transactions.push(Transaction::sell_x(
            S::from_i64(a as i64),
            Owner::User(i as u32 + 1),
        )?);
    }
    let n = integers.len() as u32;
    transactions.push(Transaction::sell_y(q_star.clone(), Owner::User(n + 1))?);
    transactions.push(Transaction::sell_y(q_star.clone(), Owner::User(n + 2))?);

    Ok(PartitionInstance {
        integers: integers.to_vec(),
        half_sum: t,
        q_star,
        curve,
        s0,
        market,
        transactions,
    })
}

/// Everything the reduction produced for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutcome<S> {
    /// `None` when some integer exceeds the half-sum, which settles the
    /// question without building a pool.
    pub instance: Option<PartitionInstance<S>>,
    pub decision: Option<Decision<S>>,
    /// Indices into the integers of one half of a balanced partition.
    pub subset: Option<Vec<usize>>,
}

/// Runs the reduction end to end: build the pool, decide whether `M` is
/// reachable, and read the partition off the witness.
pub fn reduce_partition<S: Scalar>(
    integers: &[u64],
    fee: S,
    config: &SearchConfig<S>,
) -> Result<ReductionOutcome<S>> {
    if !integers.is_empty() && integers.iter().all(|&a| a > 0) && oversized(integers)?.is_some() {
        return Ok(ReductionOutcome {
            instance: None,
            decision: None,
            subset: None,
        });
    }
    let instance = gen_partition_instance(integers, fee, S::one(), S::one())?;
    let decision = achieves_upper_bound(
        &instance.s0,
        &instance.transactions,
        &instance.curve,
        &instance.market,
        config,
    )?;
    let subset = match decision.witness() {
        Some(witness) => Some(extract_subset(&instance, witness)?),
        None => None,
    };
    Ok(ReductionOutcome {
        instance: Some(instance),
        decision: Some(decision),
        subset,
    })
}

/// The X sales executed strictly between the two Y sales.
fn extract_subset<S: Scalar>(
    instance: &PartitionInstance<S>,
    witness: &super::Strategy<S>,
) -> Result<Vec<usize>> {
    let (first, second) = instance.sell_y_indices();
    let position = |idx: usize| witness.origins.iter().position(|o| *o == Some(idx));
    let (Some(a), Some(b)) = (position(first), position(second)) else {
        return Err(Error::Internal(
            "witness reaches the bound without executing both Y sales".into(),
        ));
    };
    let (lo, hi) = (a.min(b), a.max(b));
    let mut subset: Vec<usize> = witness.origins[lo + 1..hi]
        .iter()
        .filter_map(|o| *o)
        .filter(|&i| i < instance.integers.len())
        .collect();
    subset.sort_unstable();
    let sum: u64 = subset.iter().map(|&i| instance.integers[i]).sum();
    let total: u64 = instance.integers.iter().sum();
    if 2 * sum != total {
        return Err(Error::Internal(format!(
            "extracted subset sums to {sum}, expected {}",
            instance.half_sum.render()
        )));
    }
    Ok(subset)
}

/// Finds one half of a balanced partition through the miner-profit decision
/// procedure, or `None` if there is none.
pub fn solve_partition_via_mev<S: Scalar>(
    integers: &[u64],
    fee: S,
    config: &SearchConfig<S>,
) -> Result<Option<Vec<usize>>> {
    Ok(reduce_partition(integers, fee, config)?.subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arbitrage::{arbitragable_profit, upper_bound_m};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    fn fee() -> Q {
        q(19, 100)
    }

    #[test]
    fn instance_for_one_two_three() {
        let inst = gen_partition_instance(&[1, 2, 3], fee(), q(1, 1), q(1, 1)).unwrap();
        assert_eq!(inst.half_sum, q(3, 1));
        assert_eq!(inst.s0.x, q(243, 10));
        let bounds = arb_bounds(&inst.curve, &inst.market).unwrap();
        assert_eq!(bounds.lower, q(2187, 100));
        assert_eq!(inst.s0.x.clone() - bounds.lower.clone(), q(243, 100));
        // The Y sale overshoots L_x.
        let y_after = inst.s0.y.clone() + q(81, 100) * inst.q_star.clone();
        assert!(inst.curve.reserve_x(&y_after).unwrap() < bounds.lower);
        for tx in &inst.transactions[..3] {
            assert_eq!(
                arbitragable_profit(&inst.s0, tx, &inst.curve, &inst.market).unwrap(),
                q(0, 1)
            );
        }
        let ap_y = arbitragable_profit(&inst.s0, &inst.transactions[3], &inst.curve, &inst.market)
            .unwrap();
        assert!(ap_y.is_positive());
        assert_eq!(
            upper_bound_m(&inst.s0, &inst.transactions, &inst.curve, &inst.market).unwrap(),
            q(2, 1) * ap_y
        );
    }

    #[test]
    fn rejects_oversized_element() {
        assert!(matches!(
            gen_partition_instance(&[5], fee(), q(1, 1), q(1, 1)),
            Err(Error::Invalid { .. })
        ));
    }

    #[test]
    fn rejects_irrational_root_and_zero_fee() {
        assert!(matches!(
            gen_partition_instance(&[1, 1], q(3, 10), q(1, 1), q(1, 1)),
            Err(Error::Irrational(_))
        ));
        assert!(gen_partition_instance(&[1, 1], q(0, 1), q(1, 1), q(1, 1)).is_err());
        assert!(gen_partition_instance(&[], fee(), q(1, 1), q(1, 1)).is_err());
        assert!(gen_partition_instance(&[0, 2], fee(), q(1, 1), q(1, 1)).is_err());
    }

    #[test]
    fn non_unit_prices_keep_the_gap() {
        let inst = gen_partition_instance(&[2, 3, 5], fee(), q(3, 2), q(1, 4)).unwrap();
        let bounds = arb_bounds(&inst.curve, &inst.market).unwrap();
        assert_eq!(inst.s0.x.clone() - bounds.lower, q(81, 100) * q(5, 1));
    }

    #[test]
    fn solves_one_two_three() {
        let subset = solve_partition_via_mev(&[1, 2, 3], fee(), &SearchConfig::default())
            .unwrap()
            .unwrap();
        let sum: u64 = subset.iter().map(|&i| [1u64, 2, 3][i]).sum();
        assert_eq!(sum, 3);
    }

    #[test]
    fn symmetric_pair() {
        let subset = solve_partition_via_mev(&[2, 2], fee(), &SearchConfig::default())
            .unwrap()
            .unwrap();
        assert_eq!(subset.len(), 1);
    }

    #[test]
    fn unbalanced_inputs_have_no_solution() {
        // 3 > t = 2.5: settled without a search.
        let outcome = reduce_partition(&[1, 1, 3], fee(), &SearchConfig::default()).unwrap();
        assert!(outcome.instance.is_none() && outcome.subset.is_none());
        // Every element fits under t = 2.5 but no subset hits it.
        let outcome = reduce_partition(&[1, 2, 2], fee(), &SearchConfig::default()).unwrap();
        let decision = outcome.decision.unwrap();
        assert!(!decision.achieved);
        assert!(decision.best.declared_profit < decision.upper_bound);
        assert!(outcome.subset.is_none());
    }
}
