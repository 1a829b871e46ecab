//! JSON reports. Every scalar is written as a lossless string.

use serde::{Deserialize, Serialize};

use crate::arbitrage::{is_centered, ArbGeometry};
use crate::curve::Curve;
use crate::error::Result;
use crate::exchange::{ExecutionTrace, MarketContext, Owner, PoolState, Side, Transaction};
use crate::scalar::{NumericMode, Scalar};
use crate::scenario::TxSpec;
use crate::strategy::Strategy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub subset: Vec<usize>,
    pub sequence: Vec<TxSpec>,
    pub profit: String,
    pub upper_bound: String,
    /// `upper_bound - profit`.
    pub gap: String,
}

impl StrategyReport {
    pub fn new<S: Scalar>(strategy: &Strategy<S>, upper_bound: &S) -> Self {
        Self {
            subset: strategy.chosen_subset.clone(),
            sequence: strategy.sequence.iter().map(TxSpec::from_tx).collect(),
            profit: strategy.declared_profit.render(),
            upper_bound: upper_bound.render(),
            gap: (upper_bound.clone() - strategy.declared_profit.clone()).render(),
        }
    }

    pub fn transactions<S: Scalar>(&self) -> Result<Vec<Transaction<S>>> {
        self.sequence.iter().map(TxSpec::to_tx).collect()
    }
}

/// One line of an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub index: usize,
    pub side: Side,
    pub owner: Owner,
    pub qty: String,
    pub paid: String,
    pub received: String,
    pub x: String,
    pub y: String,
    pub miner_profit_cum: String,
}

pub fn trace_lines<S: Scalar>(trace: &ExecutionTrace<S>) -> Vec<TraceLine> {
    trace
        .steps
        .iter()
        .zip(&trace.cumulative_miner_profit)
        .enumerate()
        .map(|(index, (step, u))| TraceLine {
            index,
            side: step.tx.side(),
            owner: step.tx.owner(),
            qty: step.tx.quantity().render(),
            paid: step.paid.render(),
            received: step.received.render(),
            x: step.post.x.render(),
            y: step.post.y.render(),
            miner_profit_cum: u.render(),
        })
        .collect()
}

/// Arbitrage geometry of a scenario. Profit figures are `None` when the
/// initial state is not centered, since they are only defined from a
/// centered start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub numeric_mode: NumericMode,
    pub centered: bool,
    #[serde(rename = "L_x")]
    pub lower: String,
    #[serde(rename = "R_x")]
    pub upper: String,
    pub ap: Option<Vec<String>>,
    #[serde(rename = "M")]
    pub m: Option<String>,
    pub phi_s0: Option<String>,
}

pub fn analyze<S: Scalar, C: Curve<S> + ?Sized>(
    s0: &PoolState<S>,
    txs: &[Transaction<S>],
    curve: &C,
    market: &MarketContext<S>,
) -> Result<Analysis> {
    let geometry = ArbGeometry::new(curve, market)?;
    let bounds = geometry.bounds();
    let centered = is_centered(s0, curve, market)?;
    let (ap, m, phi_s0) = if centered {
        let aps = txs
            .iter()
            .map(|tx| geometry.arbitragable_profit(s0, tx))
            .collect::<Result<Vec<_>>>()?;
        let m = aps.iter().cloned().fold(S::zero(), |a, b| a + b);
        (
            Some(aps.iter().map(Scalar::render).collect()),
            Some(m.render()),
            Some(geometry.potential(&s0.x)?.render()),
        )
    } else {
        (None, None, None)
    };
    Ok(Analysis {
        numeric_mode: S::MODE,
        centered,
        lower: bounds.lower.render(),
        upper: bounds.upper.render(),
        ap,
        m,
        phi_s0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveParams;
    use crate::exchange::execute_sequence;
    use crate::strategy::optimal_f0;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    #[test]
    fn strategy_report_fields() {
        let s0 = PoolState::new(q(100, 1), q(100, 1));
        let c = CurveParams::constant_product(q(10000, 1)).unwrap();
        let m = MarketContext::new(q(1, 1), q(1, 1), q(0, 1)).unwrap();
        let users = [Transaction::sell_x(q(10, 1), Owner::User(1)).unwrap()];
        let s = optimal_f0(&s0, &users, &c, &m).unwrap();
        let report = StrategyReport::new(&s, &q(10, 11));
        assert_eq!(report.profit, "10/11");
        assert_eq!(report.gap, "0");
        assert_eq!(report.subset, vec![0]);
        let back: Vec<Transaction<Q>> = report.transactions().unwrap();
        assert_eq!(back, s.sequence);
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["sequence"][1]["owner"], "miner");

        let trace = execute_sequence(&s0, &s.sequence, &c, &m).unwrap();
        let lines = trace_lines(&trace);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].x, "110");
        assert_eq!(lines[0].miner_profit_cum, "0");
        assert_eq!(lines[1].x, "100");
        assert_eq!(lines[1].miner_profit_cum, "10/11");
    }

    #[test]
    fn analysis_of_reference_pool() {
        let s0 = PoolState::new(q(100, 1), q(100, 1));
        let c = CurveParams::constant_product(q(10000, 1)).unwrap();
        let m = MarketContext::new(q(1, 1), q(1, 1), q(19, 100)).unwrap();
        let users = [Transaction::sell_x(q(20, 1), Owner::User(1)).unwrap()];
        let a = analyze(&s0, &users, &c, &m).unwrap();
        assert!(a.centered);
        assert_eq!(a.lower, "90");
        assert_eq!(a.upper, "1000/9");
        assert_eq!(a.phi_s0.as_deref(), Some("0"));
        let json = serde_json::to_value(&a).unwrap();
        assert!(json.get("L_x").is_some() && json.get("M").is_some());

        let skewed = PoolState::new(q(80, 1), q(125, 1));
        let a = analyze(&skewed, &users, &c, &m).unwrap();
        assert!(!a.centered);
        assert_eq!(a.m, None);
    }
}
