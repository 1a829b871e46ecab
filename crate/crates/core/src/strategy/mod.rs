//! Miner strategies under the greedy sequencing rule.
//!
//! * [`optimal_f0`]: the exact optimum when the pool charges no fee. Every
//!   user transaction is immediately followed by a miner trade that restores
//!   the starting state, which collects each transaction's arbitragable
//!   profit and therefore meets the upper bound `M`.
//! * [`brute_force_optimal`]: exhaustive branch-and-bound for small instances
//!   with any fee.
//! * [`achieves_upper_bound`]: decides whether some strategy earns exactly `M`.
//! * [`partition`]: the reduction from Partition to that decision problem.

mod partition;
mod search;

pub use partition::{
    gen_partition_instance, reduce_partition, solve_partition_via_mev, PartitionInstance,
    ReductionOutcome,
};
pub use search::{achieves_upper_bound, brute_force_optimal, Decision, SearchConfig};

use crate::arbitrage::ensure_centered;
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exchange::{
    execute_sequence, miner_profit, ExecutionTrace, MarketContext, Owner, PoolState, Side,
    Transaction,
};
use crate::scalar::Scalar;
use crate::sequencing::verify_gsr;

/// A miner plan: which user transactions run, interleaved with the miner's own.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy<S> {
    /// Indices into the user transaction list, ascending.
    pub chosen_subset: Vec<usize>,
    pub sequence: Vec<Transaction<S>>,
    /// For each entry of `sequence`, the user transaction index it came from,
    /// or `None` for a miner transaction.
    pub origins: Vec<Option<usize>>,
    pub declared_profit: S,
}

/// One step of a plan before it is turned into a [`Strategy`].
#[derive(Debug, Clone, PartialEq)]
pub enum PlanStep<S> {
    User(usize),
    Miner(Transaction<S>),
}

impl<S: Scalar> Strategy<S> {
    /// Materialises a plan, replays it, and checks that the rule accepts it.
    pub fn from_plan<C: Curve<S> + ?Sized>(
        s0: &PoolState<S>,
        user_txs: &[Transaction<S>],
        plan: Vec<PlanStep<S>>,
        curve: &C,
        market: &MarketContext<S>,
    ) -> Result<Self> {
        let mut sequence = Vec::with_capacity(plan.len());
        let mut origins = Vec::with_capacity(plan.len());
        let mut chosen_subset = Vec::new();
        for step in plan {
            match step {
                PlanStep::User(i) => {
                    let tx = user_txs.get(i).ok_or_else(|| {
                        Error::invalid("plan", format!("no user transaction {i}"))
                    })?;
                    sequence.push(tx.clone());
                    origins.push(Some(i));
                    chosen_subset.push(i);
                }
                PlanStep::Miner(tx) => {
                    sequence.push(tx.with_owner(Owner::Miner));
                    origins.push(None);
                }
            }
        }
        chosen_subset.sort_unstable();
        if chosen_subset.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("plan", "a user transaction appears twice"));
        }
        let witness = verify_gsr(s0, &sequence, curve, market.fee())?;
        if !witness.valid {
            return Err(Error::Internal(format!(
                "strategy violates the sequencing rule: {:?}",
                witness.first_violation
            )));
        }
        let trace = execute_sequence(s0, &sequence, curve, market)?;
        Ok(Self {
            chosen_subset,
            sequence,
            origins,
            declared_profit: miner_profit(&trace, market),
        })
    }

    pub fn replay<C: Curve<S> + ?Sized>(
        &self,
        s0: &PoolState<S>,
        curve: &C,
        market: &MarketContext<S>,
    ) -> Result<ExecutionTrace<S>> {
        execute_sequence(s0, &self.sequence, curve, market)
    }

    pub fn empty() -> Self {
        Self {
            chosen_subset: Vec::new(),
            sequence: Vec::new(),
            origins: Vec::new(),
            declared_profit: S::zero(),
        }
    }
}

pub(crate) fn require_user_owned<S: Scalar>(user_txs: &[Transaction<S>]) -> Result<()> {
    match user_txs.iter().position(|tx| tx.owner().is_miner()) {
        Some(i) => Err(Error::invalid(
            "user transactions",
            format!("transaction {i} is owned by the miner"),
        )),
        None => Ok(()),
    }
}

/// The fee-free optimum: each user transaction, in the given order, followed
/// by the miner trade that returns the pool to `s0`.
pub fn optimal_f0<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    user_txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
) -> Result<Strategy<S>> {
    if !market.fee().is_zero() {
        return Err(Error::NonZeroFee(market.fee().render()));
    }
    require_user_owned(user_txs)?;
    ensure_centered(s0, curve, market)?;
    let mut plan = Vec::with_capacity(2 * user_txs.len());
    for (i, tx) in user_txs.iter().enumerate() {
        plan.push(PlanStep::User(i));
        let restore = match tx.side() {
            Side::SellX => {
                let y_after = curve.reserve_y(&(s0.x.clone() + tx.quantity().clone()))?;
                Transaction::sell_y(s0.y.clone() - y_after, Owner::Miner)?
            }
            Side::SellY => {
                let x_after = curve.reserve_x(&(s0.y.clone() + tx.quantity().clone()))?;
                Transaction::sell_x(s0.x.clone() - x_after, Owner::Miner)?
            }
        };
        plan.push(PlanStep::Miner(restore));
    }
    Strategy::from_plan(s0, user_txs, plan, curve, market)
}
