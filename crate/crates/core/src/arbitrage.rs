//! Arbitrage geometry against fixed exogenous prices.
//!
//! With fee `f`, no single trade is profitable while the X reserve sits in
//! `[L_x, R_x]`, where `r(L_x) = p_x / ((1 - f) p_y)` and
//! `r(R_x) = (1 - f) p_x / p_y`. Outside the interval the best single trade
//! pushes the reserve exactly to the nearer bound.
//!
//! From a centered start (`r(x0) = p_x / p_y`) each user transaction carries
//! an *arbitragable profit*: what a back-run to the nearer bound would earn if
//! the transaction ran alone from `x0`. Their sum bounds the miner's profit
//! under the greedy sequencing rule; the potential `phi` tracks how much
//! back-run value the current state still holds.

use serde::Serialize;

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exchange::{
    execute_sequence, miner_profit, ExecutionTrace, MarketContext, Owner, PoolState, Side,
    Transaction,
};
use crate::scalar::{max, min, Scalar};
use crate::sequencing::direction_allowed;

/// The arbitrage-free interval `[L_x, R_x]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArbBounds<S> {
    #[serde(rename = "L_x")]
    pub lower: S,
    #[serde(rename = "R_x")]
    pub upper: S,
}

impl<S: Scalar> ArbBounds<S> {
    pub fn contains(&self, x: &S) -> bool {
        self.lower <= *x && *x <= self.upper
    }
}

pub fn arb_bounds<S: Scalar, C: Curve<S> + ?Sized>(
    curve: &C,
    market: &MarketContext<S>,
) -> Result<ArbBounds<S>> {
    let ratio = market.price_ratio();
    let lower = curve.solve_rate(&(ratio.clone() / market.retained()))?;
    let upper = curve.solve_rate(&(ratio * market.retained()))?;
    Ok(ArbBounds { lower, upper })
}

/// Whether the pool rate at `state` equals `p_x / p_y`: exactly in exact
/// mode, within `1e-9` relative otherwise.
pub fn is_centered<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<bool> {
    let rate = curve.marginal_rate(&state.x)?;
    let target = market.price_ratio();
    Ok(match S::MODE {
        crate::NumericMode::Exact => rate == target,
        crate::NumericMode::Float => {
            (rate.to_f64() - target.to_f64()).abs() <= 1e-9 * target.to_f64()
        }
    })
}

pub fn ensure_centered<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<()> {
    if is_centered(state, curve, market)? {
        Ok(())
    } else {
        Err(Error::NotCentered {
            rate: curve.marginal_rate(&state.x)?.render(),
            target: market.price_ratio().render(),
        })
    }
}

/// Precomputed interval data shared by the profit and potential formulas.
#[derive(Debug, Clone)]
pub struct ArbGeometry<'a, S, C: ?Sized> {
    curve: &'a C,
    market: &'a MarketContext<S>,
    bounds: ArbBounds<S>,
    y_at_lower: S,
    y_at_upper: S,
}

impl<'a, S: Scalar, C: Curve<S> + ?Sized> ArbGeometry<'a, S, C> {
    pub fn new(curve: &'a C, market: &'a MarketContext<S>) -> Result<Self> {
        let bounds = arb_bounds(curve, market)?;
        let y_at_lower = curve.reserve_y(&bounds.lower)?;
        let y_at_upper = curve.reserve_y(&bounds.upper)?;
        Ok(Self {
            curve,
            market,
            bounds,
            y_at_lower,
            y_at_upper,
        })
    }

    pub fn bounds(&self) -> &ArbBounds<S> {
        &self.bounds
    }

    /// Value of pushing reserves from `x_from` to `x_to` through the curve
    /// with one miner trade, at exogenous prices. Selling X when moving up,
    /// selling Y when moving down.
    pub fn move_value(&self, x_from: &S, x_to: &S) -> Result<S> {
        let (p_x, p_y) = (self.market.p_x().clone(), self.market.p_y().clone());
        let (y_from, y_to) = (self.curve.reserve_y(x_from)?, self.curve.reserve_y(x_to)?);
        let retained = self.market.retained();
        Ok(if x_to > x_from {
            (y_from - y_to) * p_y - (x_to.clone() - x_from.clone()) / retained * p_x
        } else {
            (x_from.clone() - x_to.clone()) * p_x - (y_to - y_from) / retained * p_y
        })
    }

    /// Arbitragable profit of `tx` from the centered start `s0`. Does not
    /// re-check centering.
    pub fn arbitragable_profit(&self, s0: &PoolState<S>, tx: &Transaction<S>) -> Result<S> {
        let retained = self.market.retained();
        let (p_x, p_y) = (self.market.p_x().clone(), self.market.p_y().clone());
        let inflow = retained.clone() * tx.quantity().clone();
        match tx.side() {
            Side::SellX => {
                let pushed = max(s0.x.clone() + inflow, self.bounds.upper.clone());
                let y_pushed = self.curve.reserve_y(&pushed)?;
                Ok((pushed - self.bounds.upper.clone()) * p_x
                    - (self.y_at_upper.clone() - y_pushed) / retained * p_y)
            }
            Side::SellY => {
                let reached = self.curve.reserve_x(&(s0.y.clone() + inflow))?;
                let pushed = min(reached, self.bounds.lower.clone());
                let y_pushed = self.curve.reserve_y(&pushed)?;
                Ok((y_pushed - self.y_at_lower.clone()) * p_y
                    - (self.bounds.lower.clone() - pushed) / retained * p_x)
            }
        }
    }

    /// The potential at reserve level `x`: the value of the single trade that
    /// brings `x` back to the interval, zero inside it.
    pub fn potential(&self, x: &S) -> Result<S> {
        let retained = self.market.retained();
        let (p_x, p_y) = (self.market.p_x().clone(), self.market.p_y().clone());
        if *x > self.bounds.upper {
            let y = self.curve.reserve_y(x)?;
            Ok((x.clone() - self.bounds.upper.clone()) * p_x
                + (y - self.y_at_upper.clone()) / retained * p_y)
        } else if *x < self.bounds.lower {
            let y = self.curve.reserve_y(x)?;
            Ok((x.clone() - self.bounds.lower.clone()) / retained * p_x
                + (y - self.y_at_lower.clone()) * p_y)
        } else {
            Ok(S::zero())
        }
    }
}

/// Best single miner trade from `state`, with its profit. `None` inside the
/// arbitrage-free interval.
pub fn optimal_single_arb<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<Option<(Transaction<S>, S)>> {
    let bounds = arb_bounds(curve, market)?;
    let retained = market.retained();
    let tx = if state.x < bounds.lower {
        Transaction::sell_x((bounds.lower - state.x.clone()) / retained, Owner::Miner)?
    } else if state.x > bounds.upper {
        let target_y = curve.reserve_y(&bounds.upper)?;
        Transaction::sell_y((target_y - state.y.clone()) / retained, Owner::Miner)?
    } else {
        return Ok(None);
    };
    let trace = execute_sequence(state, std::slice::from_ref(&tx), curve, market)?;
    let profit = miner_profit(&trace, market);
    Ok(Some((tx, profit)))
}

/// Moves an un-centered state into the arbitrage-free interval with one
/// optimal arbitrage trade.
pub fn recenter<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<PoolState<S>> {
    match optimal_single_arb(state, curve, market)? {
        Some((tx, _)) => Ok(crate::exchange::apply_tx(state, &tx, curve, market.fee())?.0),
        None => Ok(state.clone()),
    }
}

pub fn arbitragable_profit<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    tx: &Transaction<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<S> {
    ensure_centered(s0, curve, market)?;
    ArbGeometry::new(curve, market)?.arbitragable_profit(s0, tx)
}

/// `M`: the sum of arbitragable profits over `user_txs`.
pub fn upper_bound_m<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    user_txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
) -> Result<S> {
    ensure_centered(s0, curve, market)?;
    let geometry = ArbGeometry::new(curve, market)?;
    user_txs.iter().try_fold(S::zero(), |acc, tx| {
        Ok(acc + geometry.arbitragable_profit(s0, tx)?)
    })
}

pub fn potential<S: Scalar, C: Curve<S> + ?Sized>(
    state: &PoolState<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<S> {
    ArbGeometry::new(curve, market)?.potential(&state.x)
}

/// Per-step potential `phi_i` and accumulated arbitragable profit `V_i` of
/// the user transactions executed so far.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTrace<S> {
    pub phi: Vec<S>,
    pub cumulative_ap: Vec<S>,
    /// Steps before the first one admitted only by the one-sided-suffix
    /// clause. The bound `U_i + phi_i <= V_i` is only claimed on this prefix.
    pub checked_steps: usize,
}

impl<S: Scalar> PotentialTrace<S> {
    /// First step (0-based) on the checked prefix where
    /// `U_i + phi_i > V_i + slack`.
    pub fn first_violation(&self, trace: &ExecutionTrace<S>, slack: &S) -> Option<usize> {
        (0..self.checked_steps).find(|&i| {
            trace.cumulative_miner_profit[i].clone() + self.phi[i].clone()
                > self.cumulative_ap[i].clone() + slack.clone()
        })
    }
}

pub fn potential_trace<S: Scalar, C: Curve<S> + ?Sized>(
    trace: &ExecutionTrace<S>,
    curve: &C,
    market: &MarketContext<S>,
) -> Result<PotentialTrace<S>> {
    let s0 = &trace.initial;
    ensure_centered(s0, curve, market)?;
    let geometry = ArbGeometry::new(curve, market)?;
    let mut phi = Vec::with_capacity(trace.steps.len());
    let mut cumulative_ap = Vec::with_capacity(trace.steps.len());
    let mut v = S::zero();
    let mut checked_steps = None;
    for (i, step) in trace.steps.iter().enumerate() {
        if checked_steps.is_none() && !direction_allowed(step.tx.side(), &step.pre, s0) {
            checked_steps = Some(i);
        }
        if !step.tx.owner().is_miner() {
            v = v + geometry.arbitragable_profit(s0, &step.tx)?;
        }
        phi.push(geometry.potential(&step.post.x)?);
        cumulative_ap.push(v.clone());
    }
    Ok(PotentialTrace {
        phi,
        cumulative_ap,
        checked_steps: checked_steps.unwrap_or(trace.steps.len()),
    })
}
