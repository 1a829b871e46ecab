//! Exhaustive branch-and-bound over miner strategies for small instances.
//!
//! The search space is shaped by three restrictions:
//!
//! * at most one miner trade sits between consecutive user transactions
//!   (same-side trades merge, opposite-side pairs only pay the fee twice);
//! * a miner trade always moves the X reserve onto a target level from
//!   `{L_x, R_x, x0}` plus an optional caller grid;
//! * sequences never enter the one-sided-suffix escape of the sequencing
//!   rule. Past that point the miner can only trade against the pool from
//!   the wrong side of `x0`, which never earns anything.
//!
//! A node is pruned when `U + phi(x) + sum(AP of unused users)` falls below
//! the incumbent. Ties are never pruned, so the result is the maximum-profit
//! plan with the lexicographically smallest move sequence no matter how
//! branches are scheduled across threads.

use std::sync::Mutex;

use rayon::prelude::*;

use super::{require_user_owned, PlanStep, Strategy};
use crate::arbitrage::{ensure_centered, upper_bound_m, ArbGeometry};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::exchange::{apply_tx, MarketContext, Owner, PoolState, Side, Step, Transaction};
use crate::scalar::{approx_eq, NumericMode, Scalar};
use crate::sequencing::direction_allowed;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig<S> {
    /// Largest number of user transactions accepted.
    pub max_n: usize,
    /// Extra X-reserve levels a miner trade may target.
    pub extra_grid: Vec<S>,
    /// Worker threads; 1 searches on the calling thread.
    pub threads: usize,
}

impl<S> Default for SearchConfig<S> {
    fn default() -> Self {
        Self {
            max_n: 8,
            extra_grid: Vec::new(),
            threads: 1,
        }
    }
}

/// Ordering of this enum defines the tie-break between equal-profit plans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Move {
    User(usize),
    Miner(usize),
}

#[derive(Debug, Clone)]
struct Node<S> {
    state: PoolState<S>,
    profit: S,
    used: u64,
    remaining_ap: S,
}

#[derive(Debug, Clone)]
struct Best<S> {
    profit: S,
    path: Vec<Move>,
}

impl<S: Scalar> Best<S> {
    fn beats(&self, other: &Best<S>) -> bool {
        self.profit > other.profit || (self.profit == other.profit && self.path < other.path)
    }
}

fn keep_better<S: Scalar>(slot: &mut Option<Best<S>>, candidate: Best<S>) {
    if slot.as_ref().map_or(true, |b| candidate.beats(b)) {
        *slot = Some(candidate);
    }
}

struct Search<'a, S, C: ?Sized> {
    s0: &'a PoolState<S>,
    curve: &'a C,
    market: &'a MarketContext<S>,
    geometry: ArbGeometry<'a, S, C>,
    users: &'a [Transaction<S>],
    user_ap: Vec<S>,
    /// Nearest earlier identical user transaction; a duplicate is only tried
    /// once its twin has been used.
    twin: Vec<Option<usize>>,
    targets: Vec<S>,
    incumbent: Mutex<Option<S>>,
}

impl<'a, S: Scalar, C: Curve<S> + ?Sized + Sync> Search<'a, S, C> {
    fn slack(&self, incumbent: &S) -> S {
        match S::MODE {
            NumericMode::Exact => S::zero(),
            NumericMode::Float => {
                S::from_ratio(1, 10_000_000_000) * crate::scalar::max(S::one(), incumbent.abs())
            }
        }
    }

    fn pruned(&self, node: &Node<S>) -> Result<bool> {
        let Some(incumbent) = self.incumbent.lock().expect("incumbent lock").clone() else {
            return Ok(false);
        };
        let bound = node.profit.clone()
            + self.geometry.potential(&node.state.x)?
            + node.remaining_ap.clone();
        let slack = self.slack(&incumbent);
        Ok(bound < incumbent - slack)
    }

    fn offer(&self, node: &Node<S>, path: &[Move], best: &mut Option<Best<S>>) {
        keep_better(
            best,
            Best {
                profit: node.profit.clone(),
                path: path.to_vec(),
            },
        );
        let mut incumbent = self.incumbent.lock().expect("incumbent lock");
        if incumbent.as_ref().map_or(true, |v| node.profit > *v) {
            *incumbent = Some(node.profit.clone());
        }
    }

    fn miner_trade(&self, state: &PoolState<S>, target: &S) -> Result<Option<Transaction<S>>> {
        let retained = self.market.retained();
        if (target.clone() - state.x.clone()).abs() <= S::reserve_eps() {
            return Ok(None);
        }
        let tx = if *target > state.x {
            if !direction_allowed(Side::SellX, state, self.s0) {
                return Ok(None);
            }
            Transaction::sell_x((target.clone() - state.x.clone()) / retained, Owner::Miner)?
        } else {
            if !direction_allowed(Side::SellY, state, self.s0) {
                return Ok(None);
            }
            let y_target = self.curve.reserve_y(target)?;
            Transaction::sell_y((y_target - state.y.clone()) / retained, Owner::Miner)?
        };
        Ok(Some(tx))
    }

    fn step(&self, node: &Node<S>, tx: &Transaction<S>) -> Result<PoolState<S>> {
        Ok(apply_tx(&node.state, tx, self.curve, self.market.fee())?.0)
    }

    /// Children of a gap: staying put, then one miner trade per target.
    fn gap_children(&self, node: &Node<S>) -> Result<Vec<(Option<Move>, Node<S>)>> {
        let mut out = vec![(None, node.clone())];
        for (j, target) in self.targets.iter().enumerate() {
            let Some(tx) = self.miner_trade(&node.state, target)? else {
                continue;
            };
            let (post, received) = apply_tx(&node.state, &tx, self.curve, self.market.fee())?;
            let value = Step {
                tx: tx.clone(),
                pre: node.state.clone(),
                post: post.clone(),
                paid: tx.quantity().clone(),
                received,
            }
            .value(self.market);
            out.push((
                Some(Move::Miner(j)),
                Node {
                    state: post,
                    profit: node.profit.clone() + value,
                    used: node.used,
                    remaining_ap: node.remaining_ap.clone(),
                },
            ));
        }
        Ok(out)
    }

    /// User transactions the rule admits from `node`, one per twin class.
    fn user_children(&self, node: &Node<S>) -> Result<Vec<(Move, Node<S>)>> {
        let mut out = Vec::new();
        for (i, tx) in self.users.iter().enumerate() {
            if node.used & (1 << i) != 0 {
                continue;
            }
            if let Some(t) = self.twin[i] {
                if node.used & (1 << t) == 0 {
                    continue;
                }
            }
            if !direction_allowed(tx.side(), &node.state, self.s0) {
                continue;
            }
            out.push((
                Move::User(i),
                Node {
                    state: self.step(node, tx)?,
                    profit: node.profit.clone(),
                    used: node.used | (1 << i),
                    remaining_ap: node.remaining_ap.clone() - self.user_ap[i].clone(),
                },
            ));
        }
        Ok(out)
    }

    fn explore_gap(
        &self,
        node: &Node<S>,
        path: &mut Vec<Move>,
        best: &mut Option<Best<S>>,
    ) -> Result<()> {
        if self.pruned(node)? {
            return Ok(());
        }
        for (mv, child) in self.gap_children(node)? {
            if let Some(mv) = mv {
                path.push(mv);
            }
            self.explore_users(&child, path, best)?;
            if mv.is_some() {
                path.pop();
            }
        }
        Ok(())
    }

    fn explore_users(
        &self,
        node: &Node<S>,
        path: &mut Vec<Move>,
        best: &mut Option<Best<S>>,
    ) -> Result<()> {
        self.offer(node, path, best);
        if self.pruned(node)? {
            return Ok(());
        }
        for (mv, child) in self.user_children(node)? {
            path.push(mv);
            self.explore_gap(&child, path, best)?;
            path.pop();
        }
        Ok(())
    }

    fn run(&self, threads: usize) -> Result<Best<S>> {
        let root = Node {
            state: self.s0.clone(),
            profit: S::zero(),
            used: 0,
            remaining_ap: self
                .user_ap
                .iter()
                .cloned()
                .fold(S::zero(), |acc, ap| acc + ap),
        };

        // Split at depth two (optional miner trade, first user transaction) so
        // the frontier can be searched independently.
        let mut best = None;
        let mut frontier = Vec::new();
        for (mv, child) in self.gap_children(&root)? {
            let prefix: Vec<Move> = mv.into_iter().collect();
            self.offer(&child, &prefix, &mut best);
            for (user_mv, grandchild) in self.user_children(&child)? {
                let mut path = prefix.clone();
                path.push(user_mv);
                frontier.push((path, grandchild));
            }
        }

        let search_branch = |(mut path, node): (Vec<Move>, Node<S>)| -> Result<Option<Best<S>>> {
            let mut local = None;
            self.explore_gap(&node, &mut path, &mut local)?;
            Ok(local)
        };
        let results: Vec<Result<Option<Best<S>>>> = if threads > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            pool.install(|| frontier.into_par_iter().map(search_branch).collect())
        } else {
            frontier.into_iter().map(search_branch).collect()
        };
        for result in results {
            if let Some(candidate) = result? {
                keep_better(&mut best, candidate);
            }
        }
        best.ok_or_else(|| Error::Internal("search produced no candidate".into()))
    }

    fn to_plan(&self, path: &[Move]) -> Result<Vec<PlanStep<S>>> {
        let mut state = self.s0.clone();
        let mut plan = Vec::with_capacity(path.len());
        for mv in path {
            let tx = match *mv {
                Move::User(i) => {
                    plan.push(PlanStep::User(i));
                    self.users[i].clone()
                }
                Move::Miner(j) => {
                    let tx = self.miner_trade(&state, &self.targets[j])?.ok_or_else(|| {
                        Error::Internal("replayed miner trade became inadmissible".into())
                    })?;
                    plan.push(PlanStep::Miner(tx.clone()));
                    tx
                }
            };
            state = apply_tx(&state, &tx, self.curve, self.market.fee())?.0;
        }
        Ok(plan)
    }
}

fn build_targets<S: Scalar>(
    bounds: &crate::arbitrage::ArbBounds<S>,
    x0: &S,
    extra: &[S],
) -> Result<Vec<S>> {
    let mut targets: Vec<S> = Vec::new();
    let candidates = [bounds.lower.clone(), bounds.upper.clone(), x0.clone()];
    for t in candidates.iter().chain(extra) {
        if !t.is_positive() || !t.is_finite() {
            return Err(Error::invalid(
                "extra_grid",
                "target levels must be positive",
            ));
        }
        if !targets.iter().any(|u| approx_eq(u, t, 0.0)) {
            targets.push(t.clone());
        }
    }
    Ok(targets)
}

/// Best miner strategy for a small instance, found exhaustively.
pub fn brute_force_optimal<S: Scalar, C: Curve<S> + ?Sized + Sync>(
    s0: &PoolState<S>,
    user_txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
    config: &SearchConfig<S>,
) -> Result<Strategy<S>> {
    let limit = config.max_n.min(63);
    if user_txs.len() > limit {
        return Err(Error::TooLarge {
            n: user_txs.len(),
            max: limit,
        });
    }
    require_user_owned(user_txs)?;
    ensure_centered(s0, curve, market)?;

    let geometry = ArbGeometry::new(curve, market)?;
    let user_ap = user_txs
        .iter()
        .map(|tx| geometry.arbitragable_profit(s0, tx))
        .collect::<Result<Vec<_>>>()?;
    let twin = (0..user_txs.len())
        .map(|i| {
            (0..i).rev().find(|&j| {
                user_txs[j].side() == user_txs[i].side()
                    && user_txs[j].quantity() == user_txs[i].quantity()
            })
        })
        .collect();
    let targets = build_targets(geometry.bounds(), &s0.x, &config.extra_grid)?;

    let search = Search {
        s0,
        curve,
        market,
        geometry,
        users: user_txs,
        user_ap,
        twin,
        targets,
        incumbent: Mutex::new(None),
    };
    let best = search.run(config.threads.max(1))?;
    let strategy = Strategy::from_plan(s0, user_txs, search.to_plan(&best.path)?, curve, market)?;
    if !approx_eq(&strategy.declared_profit, &best.profit, 1e-9) {
        return Err(Error::Internal(format!(
            "replayed profit {} differs from searched profit {}",
            strategy.declared_profit.render(),
            best.profit.render()
        )));
    }
    Ok(strategy)
}

/// Outcome of the upper-bound decision.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<S> {
    pub achieved: bool,
    pub upper_bound: S,
    /// Best strategy found; a witness when `achieved` is true.
    pub best: Strategy<S>,
}

impl<S: Scalar> Decision<S> {
    pub fn witness(&self) -> Option<&Strategy<S>> {
        self.achieved.then_some(&self.best)
    }
}

/// Whether some strategy earns exactly `M` (within `1e-9` relative in
/// float mode).
pub fn achieves_upper_bound<S: Scalar, C: Curve<S> + ?Sized + Sync>(
    s0: &PoolState<S>,
    user_txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
    config: &SearchConfig<S>,
) -> Result<Decision<S>> {
    let best = brute_force_optimal(s0, user_txs, curve, market, config)?;
    let upper_bound = upper_bound_m(s0, user_txs, curve, market)?;
    let achieved = match S::MODE {
        NumericMode::Exact => best.declared_profit == upper_bound,
        NumericMode::Float => approx_eq(&best.declared_profit, &upper_bound, 1e-9),
    };
    Ok(Decision {
        achieved,
        upper_bound,
        best,
    })
}
