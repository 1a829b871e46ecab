//! Transaction execution and miner profit accounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::scalar::{approx_eq, Scalar, FLOAT_PROFIT_REL_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    SellX,
    SellY,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::SellX => Side::SellY,
            Side::SellY => Side::SellX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Owner {
    User(u32),
    Miner,
}

impl Owner {
    pub fn is_miner(self) -> bool {
        matches!(self, Owner::Miner)
    }
}

/// Exogenous prices and the pool's fee fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketContext<S> {
    p_x: S,
    p_y: S,
    fee: S,
}

impl<S: Scalar> MarketContext<S> {
    pub fn new(p_x: S, p_y: S, fee: S) -> Result<Self> {
        if !p_x.is_positive() || !p_x.is_finite() {
            return Err(Error::invalid("p_x", "must be positive"));
        }
        if !p_y.is_positive() || !p_y.is_finite() {
            return Err(Error::invalid("p_y", "must be positive"));
        }
        if fee < S::zero() || fee >= S::one() {
            return Err(Error::invalid("fee", "must lie in [0, 1)"));
        }
        Ok(Self { p_x, p_y, fee })
    }

    pub fn p_x(&self) -> &S {
        &self.p_x
    }

    pub fn p_y(&self) -> &S {
        &self.p_y
    }

    pub fn fee(&self) -> &S {
        &self.fee
    }

    /// `1 - f`, the fraction of a sale that reaches the reserves.
    pub fn retained(&self) -> S {
        S::one() - self.fee.clone()
    }

    /// `p_x / p_y`, the pool rate at which the pool agrees with the market.
    pub fn price_ratio(&self) -> S {
        self.p_x.clone() / self.p_y.clone()
    }

    pub fn price(&self, side: Side) -> &S {
        match side {
            Side::SellX => &self.p_x,
            Side::SellY => &self.p_y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolState<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> PoolState<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    /// The state on `curve` with X reserves `x`.
    pub fn at_x<C: Curve<S> + ?Sized>(curve: &C, x: S) -> Result<Self> {
        let y = curve.reserve_y(&x)?;
        Ok(Self { x, y })
    }

    /// Checks that `y` agrees with the curve at `x`: exactly in exact mode,
    /// within the reserve slack otherwise.
    pub fn is_on<C: Curve<S> + ?Sized>(&self, curve: &C) -> Result<bool> {
        if !self.x.is_positive() || !self.y.is_positive() {
            return Ok(false);
        }
        let expected = curve.reserve_y(&self.x)?;
        Ok((expected - self.y.clone()).abs() <= S::reserve_eps())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transaction<S> {
    side: Side,
    quantity: S,
    owner: Owner,
}

impl<S: Scalar> Transaction<S> {
    pub fn new(side: Side, quantity: S, owner: Owner) -> Result<Self> {
        if !quantity.is_positive() || !quantity.is_finite() {
            return Err(Error::invalid("quantity", "must be positive"));
        }
        Ok(Self {
            side,
            quantity,
            owner,
        })
    }

    pub fn sell_x(quantity: S, owner: Owner) -> Result<Self> {
        Self::new(Side::SellX, quantity, owner)
    }

    pub fn sell_y(quantity: S, owner: Owner) -> Result<Self> {
        Self::new(Side::SellY, quantity, owner)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn quantity(&self) -> &S {
        &self.quantity
    }

    pub fn owner(&self) -> Owner {
        self.owner
    }

    pub fn with_owner(&self, owner: Owner) -> Self {
        Self {
            owner,
            ..self.clone()
        }
    }
}

/// Executes one transaction. Returns the new state and the net amount of the
/// other token paid out to the seller.
pub fn apply_tx<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    tx: &Transaction<S>,
    curve: &C,
    fee: &S,
) -> Result<(PoolState<S>, S)> {
    let inflow = (S::one() - fee.clone()) * tx.quantity.clone();
    let (next, received) = match tx.side {
        Side::SellX => {
            let x = state.x.clone() + inflow;
            let y = curve.reserve_y(&x)?;
            let received = state.y.clone() - y.clone();
            (PoolState { x, y }, received)
        }
        Side::SellY => {
            let y = state.y.clone() + inflow;
            let x = curve.reserve_x(&y)?;
            let received = state.x.clone() - x.clone();
            (PoolState { x, y }, received)
        }
    };
    if !next.x.is_positive() || !next.y.is_positive() || !next.x.is_finite() || !next.y.is_finite()
    {
        return Err(Error::Overflow(format!(
            "state ({}, {}) after {:?} of {}",
            next.x.render(),
            next.y.render(),
            tx.side,
            tx.quantity.render()
        )));
    }
    // Float rounding can produce a negative zero-ish receipt on tiny trades.
    let received = if received < S::zero() {
        S::zero()
    } else {
        received
    };
    Ok((next, received))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    pub tx: Transaction<S>,
    pub pre: PoolState<S>,
    pub post: PoolState<S>,
    /// Gross amount of the sold token, fee included.
    pub paid: S,
    /// Net amount of the other token.
    pub received: S,
}

impl<S: Scalar> Step<S> {
    /// Monetary value of the step to its owner: received minus paid.
    pub fn value(&self, market: &MarketContext<S>) -> S {
        let side = self.tx.side;
        self.received.clone() * market.price(side.opposite()).clone()
            - self.paid.clone() * market.price(side).clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace<S> {
    pub initial: PoolState<S>,
    pub steps: Vec<Step<S>>,
    /// `U_i`: miner profit after step `i`.
    pub cumulative_miner_profit: Vec<S>,
}

impl<S: Scalar> ExecutionTrace<S> {
    pub fn final_state(&self) -> &PoolState<S> {
        self.steps.last().map_or(&self.initial, |s| &s.post)
    }

    pub fn final_profit(&self) -> S {
        self.cumulative_miner_profit
            .last()
            .cloned()
            .unwrap_or_else(S::zero)
    }

    pub fn transactions(&self) -> impl Iterator<Item = &Transaction<S>> {
        self.steps.iter().map(|s| &s.tx)
    }
}

pub fn execute_sequence<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
) -> Result<ExecutionTrace<S>> {
    let mut state = s0.clone();
    let mut profit = S::zero();
    let mut steps = Vec::with_capacity(txs.len());
    let mut cumulative = Vec::with_capacity(txs.len());
    for (index, tx) in txs.iter().enumerate() {
        let (post, received) =
            apply_tx(&state, tx, curve, market.fee()).map_err(|e| e.at_step(index))?;
        let step = Step {
            tx: tx.clone(),
            pre: state,
            post: post.clone(),
            paid: tx.quantity.clone(),
            received,
        };
        if tx.owner.is_miner() {
            profit = profit + step.value(market);
        }
        cumulative.push(profit.clone());
        steps.push(step);
        state = post;
    }
    let trace = ExecutionTrace {
        initial: s0.clone(),
        steps,
        cumulative_miner_profit: cumulative,
    };
    let from_deltas = miner_profit(&trace, market);
    if !approx_eq(&from_deltas, &trace.final_profit(), 1e-9) {
        return Err(Error::Internal(format!(
            "stored miner profit {} disagrees with the reserve-delta formula {}",
            trace.final_profit().render(),
            from_deltas.render()
        )));
    }
    Ok(trace)
}

/// Miner profit recomputed from reserve deltas alone. A reserve that grew
/// was paid into, so its delta is grossed up by `1 / (1 - f)`.
pub fn miner_profit<S: Scalar>(trace: &ExecutionTrace<S>, market: &MarketContext<S>) -> S {
    let gross = |before: &S, after: &S| {
        let delta = before.clone() - after.clone();
        if after > before {
            delta / market.retained()
        } else {
            delta
        }
    };
    trace
        .steps
        .iter()
        .filter(|s| s.tx.owner.is_miner())
        .fold(S::zero(), |acc, s| {
            acc + gross(&s.pre.x, &s.post.x) * market.p_x().clone()
                + gross(&s.pre.y, &s.post.y) * market.p_y().clone()
        })
}

/// Per-user `(sold, received)` pairs in execution order.
pub fn user_receipts<S: Scalar>(trace: &ExecutionTrace<S>) -> BTreeMap<u32, Vec<(S, S)>> {
    let mut out: BTreeMap<u32, Vec<(S, S)>> = BTreeMap::new();
    for step in &trace.steps {
        if let Owner::User(id) = step.tx.owner {
            out.entry(id)
                .or_default()
                .push((step.paid.clone(), step.received.clone()));
        }
    }
    out
}

/// What `tx` would receive if it were the only transaction in the block.
pub fn standalone_receipt<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    tx: &Transaction<S>,
    curve: &C,
    fee: &S,
) -> Result<S> {
    apply_tx(s0, tx, curve, fee).map(|(_, received)| received)
}

/// Profit tolerance used when comparing float-mode profits.
pub fn profits_match<S: Scalar>(a: &S, b: &S) -> bool {
    approx_eq(a, b, FLOAT_PROFIT_REL_EPS)
}
