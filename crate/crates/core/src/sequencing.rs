//! The greedy sequencing rule: verification and order construction.
//!
//! A sequence is accepted when, before each transaction, the pool either sits
//! on the side of the starting state that the transaction pushes back from,
//! or every later transaction sells the same token:
//!
//! * a `SellX` may run only if `x <= x0` or the rest of the block is all `SellX`;
//! * a `SellY` may run only if `y <= y0` or the rest of the block is all `SellY`.

use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exchange::{apply_tx, PoolState, Side, Transaction};
use crate::scalar::{le_eps, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationReason {
    WrongDirectionX,
    WrongDirectionY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based position in the executed order.
    pub position: usize,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderWitness {
    /// `order[p]` is the index of the transaction executed at position `p + 1`.
    pub order: Vec<usize>,
    pub valid: bool,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    InputOrder,
    ByQuantityAsc,
}

/// Whether the directional condition alone admits `side` at `state`. Ties
/// count as allowed.
pub fn direction_allowed<S: Scalar>(side: Side, state: &PoolState<S>, s0: &PoolState<S>) -> bool {
    match side {
        Side::SellX => le_eps(&state.x, &s0.x),
        Side::SellY => le_eps(&state.y, &s0.y),
    }
}

/// Verifies `txs` executed in the given order.
pub fn verify_gsr<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    curve: &C,
    fee: &S,
) -> Result<OrderWitness> {
    let order: Vec<usize> = (0..txs.len()).collect();
    verify_order(s0, txs, &order, curve, fee)
}

/// Verifies the subsequence `order` of `txs`. `order` must not repeat an index.
pub fn verify_order<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    order: &[usize],
    curve: &C,
    fee: &S,
) -> Result<OrderWitness> {
    let mut seen = vec![false; txs.len()];
    for &i in order {
        if i >= txs.len() {
            return Err(Error::invalid("order", format!("index {i} out of range")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid("order", format!("index {i} repeated")));
        }
    }

    // homogeneous_after[p]: every position after p sells the same token as p.
    let n = order.len();
    let mut homogeneous_after = vec![true; n];
    for p in (0..n.saturating_sub(1)).rev() {
        let same = txs[order[p + 1]].side() == txs[order[p]].side();
        homogeneous_after[p] = same && homogeneous_after[p + 1];
    }

    let mut state = s0.clone();
    for (p, &i) in order.iter().enumerate() {
        let tx = &txs[i];
        if !direction_allowed(tx.side(), &state, s0) && !homogeneous_after[p] {
            return Ok(OrderWitness {
                order: order.to_vec(),
                valid: false,
                first_violation: Some(Violation {
                    position: p + 1,
                    reason: match tx.side() {
                        Side::SellX => ViolationReason::WrongDirectionX,
                        Side::SellY => ViolationReason::WrongDirectionY,
                    },
                }),
            });
        }
        state = apply_tx(&state, tx, curve, fee)
            .map_err(|e| e.at_step(i))?
            .0;
    }
    Ok(OrderWitness {
        order: order.to_vec(),
        valid: true,
        first_violation: None,
    })
}

/// Builds an order of all of `txs` that the rule accepts, returned as indices.
///
/// Above `x0` a `SellY` is taken, below it a `SellX`; at `x0` either side is
/// eligible. Within the eligible set `tiebreak` picks. Once the required side
/// runs out the remaining (single-sided) transactions follow in tiebreak order.
pub fn greedy_permutation<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    curve: &C,
    fee: &S,
    tiebreak: TieBreak,
) -> Result<Vec<usize>> {
    let mut ranked: Vec<usize> = (0..txs.len()).collect();
    if tiebreak == TieBreak::ByQuantityAsc {
        // Stable sort keeps input order among equal quantities.
        ranked.sort_by(|&a, &b| {
            txs[a]
                .quantity()
                .partial_cmp(txs[b].quantity())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    let mut used = vec![false; txs.len()];
    let mut order = Vec::with_capacity(txs.len());
    let mut state = s0.clone();
    while order.len() < txs.len() {
        let x_ok = direction_allowed(Side::SellX, &state, s0);
        let y_ok = direction_allowed(Side::SellY, &state, s0);
        let pick = ranked.iter().copied().find(|&i| {
            !used[i]
                && match txs[i].side() {
                    Side::SellX => x_ok,
                    Side::SellY => y_ok,
                }
        });
        let Some(i) = pick else {
            // Required side exhausted: the rest is one-sided.
            order.extend(ranked.iter().copied().filter(|&i| !used[i]));
            break;
        };
        used[i] = true;
        order.push(i);
        state = apply_tx(&state, &txs[i], curve, fee)
            .map_err(|e| e.at_step(i))?
            .0;
    }
    Ok(order)
}

pub fn greedy_order<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    curve: &C,
    fee: &S,
    tiebreak: TieBreak,
) -> Result<Vec<Transaction<S>>> {
    let order = greedy_permutation(s0, txs, curve, fee, tiebreak)?;
    Ok(order.into_iter().map(|i| txs[i].clone()).collect())
}
