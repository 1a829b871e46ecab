//! Scenario files.
//!
//! ```json
//! {"curve": {"kind": "constant_product", "k": "10000"},
//!  "state0": {"x": "100", "y": "100"},
//!  "market": {"p_x": "1", "p_y": "1", "fee": "0"},
//!  "numeric_mode": "exact",
//!  "transactions": [{"side": "sell_x", "qty": "10", "owner": {"user": 1}}]}
//! ```
//!
//! Scalars are decimal or `p/q` strings. `numeric_mode` may be omitted, in
//! which case exact arithmetic is used whenever the file allows it.

use std::fs;
use std::io::Read;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::{CurveKind, CurveParams};
use crate::error::{Error, Result};
use crate::exchange::{MarketContext, Owner, PoolState, Side, Transaction};
use crate::scalar::{parse_rational, NumericMode, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub kind: CurveKind,
    pub k: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSpec {
    pub p_x: String,
    pub p_y: String,
    pub fee: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TxSpec {
    pub side: Side,
    pub qty: String,
    pub owner: Owner,
}

impl TxSpec {
    pub fn from_tx<S: Scalar>(tx: &Transaction<S>) -> Self {
        Self {
            side: tx.side(),
            qty: tx.quantity().render(),
            owner: tx.owner(),
        }
    }

    pub fn to_tx<S: Scalar>(&self) -> Result<Transaction<S>> {
        let qty = S::parse(&self.qty)?;
        Transaction::new(self.side, qty, self.owner)
    }
}

/// The on-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub curve: CurveSpec,
    pub state0: StateSpec,
    pub market: MarketSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric_mode: Option<NumericMode>,
    #[serde(default)]
    pub transactions: Vec<TxSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<S> {
    pub curve: CurveParams<S>,
    pub initial_state: PoolState<S>,
    pub market: MarketContext<S>,
    pub transactions: Vec<Transaction<S>>,
}

impl<S: Scalar> Scenario<S> {
    pub fn to_file(&self) -> ScenarioFile {
        ScenarioFile {
            curve: CurveSpec {
                kind: self.curve.kind(),
                k: self.curve.constant().render(),
            },
            state0: StateSpec {
                x: self.initial_state.x.render(),
                y: self.initial_state.y.render(),
            },
            market: MarketSpec {
                p_x: self.market.p_x().render(),
                p_y: self.market.p_y().render(),
                fee: self.market.fee().render(),
            },
            numeric_mode: Some(S::MODE),
            transactions: self.transactions.iter().map(TxSpec::from_tx).collect(),
        }
    }

    /// The same scenario with a different transaction list.
    pub fn with_transactions(&self, transactions: Vec<Transaction<S>>) -> Self {
        Self {
            transactions,
            ..self.clone()
        }
    }
}

impl Scenario<BigRational> {
    pub fn to_float(&self) -> Scenario<f64> {
        let f = |v: &BigRational| f64::from_rational(v);
        Scenario {
            curve: CurveParams::new(self.curve.kind(), f(self.curve.constant()))
                .expect("a positive rational stays positive"),
            initial_state: PoolState::new(f(&self.initial_state.x), f(&self.initial_state.y)),
            market: MarketContext::new(
                f(self.market.p_x()),
                f(self.market.p_y()),
                f(self.market.fee()),
            )
            .expect("a valid rational market stays valid"),
            transactions: self
                .transactions
                .iter()
                .map(|tx| {
                    Transaction::new(tx.side(), f(tx.quantity()), tx.owner())
                        .expect("a positive rational stays positive")
                })
                .collect(),
        }
    }
}

/// A validated scenario in the numeric mode it was loaded in.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum LoadedScenario {
    Exact(Scenario<BigRational>),
    Float(Scenario<f64>),
}

impl LoadedScenario {
    pub fn mode(&self) -> NumericMode {
        match self {
            LoadedScenario::Exact(_) => NumericMode::Exact,
            LoadedScenario::Float(_) => NumericMode::Float,
        }
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<LoadedScenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid("scenario path", format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

pub fn load_scenario_from_reader(mut reader: impl Read) -> Result<LoadedScenario> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::invalid("scenario stream", e.to_string()))?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<LoadedScenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        input: "scenario".into(),
        reason: e.to_string(),
    })?;
    validate(&file)
}

fn field(name: &str, value: &str) -> Result<BigRational> {
    parse_rational(value).map_err(|e| Error::invalid(name, e.to_string()))
}

fn positive(name: &str, value: &str) -> Result<BigRational> {
    let v = field(name, value)?;
    if v <= BigRational::zero() {
        return Err(Error::invalid(
            name,
            format!("must be positive, got {value}"),
        ));
    }
    Ok(v)
}

/// Checks every invariant and picks the numeric mode.
pub fn validate(file: &ScenarioFile) -> Result<LoadedScenario> {
    let k = positive("curve.k", &file.curve.k)?;
    let x = positive("state0.x", &file.state0.x)?;
    let y = positive("state0.y", &file.state0.y)?;
    let p_x = positive("market.p_x", &file.market.p_x)?;
    let p_y = positive("market.p_y", &file.market.p_y)?;
    let fee = field("market.fee", &file.market.fee)?;
    if fee < BigRational::zero() || fee >= BigRational::one() {
        return Err(Error::invalid(
            "market.fee",
            format!("must lie in [0, 1), got {}", file.market.fee),
        ));
    }

    let product = x.clone() * y.clone();
    if product != k {
        // Float files may round y; accept a relative slack there.
        let rel = ((product.clone() - k.clone()) / k.clone()).abs();
        let tolerated = file.numeric_mode == Some(NumericMode::Float)
            && rel.to_f64() <= crate::scalar::FLOAT_RESERVE_EPS;
        if !tolerated {
            return Err(Error::invalid(
                "state0",
                format!(
                    "x * y = {} but curve.k = {}; the initial state must lie on the curve",
                    product.render(),
                    k.render()
                ),
            ));
        }
    }

    let mut transactions = Vec::with_capacity(file.transactions.len());
    for (i, spec) in file.transactions.iter().enumerate() {
        let qty = positive(&format!("transactions[{i}].qty"), &spec.qty)?;
        transactions.push(Transaction::new(spec.side, qty, spec.owner)?);
    }

    let exact = Scenario {
        curve: CurveParams::new(file.curve.kind, k)?,
        initial_state: PoolState::new(x, y),
        market: MarketContext::new(p_x, p_y, fee)?,
        transactions,
    };

    let blocker = exact_blocker(&exact);
    match (file.numeric_mode, blocker) {
        (Some(NumericMode::Exact), Some((name, reason))) => Err(Error::invalid(
            name,
            format!("{reason}; exact mode needs it rational, use \"numeric_mode\": \"float\""),
        )),
        (Some(NumericMode::Exact), None) | (None, None) => Ok(LoadedScenario::Exact(exact)),
        (Some(NumericMode::Float), _) | (None, Some(_)) => {
            Ok(LoadedScenario::Float(exact.to_float()))
        }
    }
}

/// Why exact arithmetic cannot represent this scenario's arbitrage bounds.
fn exact_blocker(s: &Scenario<BigRational>) -> Option<(&'static str, String)> {
    let retained = s.market.retained();
    if retained.sqrt().is_none() {
        return Some((
            "market.fee",
            format!("sqrt(1 - fee) = sqrt({}) is irrational", retained.render()),
        ));
    }
    let scale = s.curve.constant().clone() / s.market.price_ratio();
    if scale.sqrt().is_none() {
        return Some((
            "curve.k",
            format!(
                "sqrt(k * p_y / p_x) = sqrt({}) is irrational",
                scale.render()
            ),
        ));
    }
    None
}
