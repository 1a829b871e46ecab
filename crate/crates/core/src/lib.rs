//! Constant-function market maker engine for studying miner profit under the
//! greedy sequencing rule.
//!
//! Every algorithm is generic over [`Scalar`], so the same code runs on exact
//! rationals ([`num_rational::BigRational`]) and on `f64`.

pub mod arbitrage;
pub mod curve;
pub mod error;
pub mod exchange;
pub mod gen;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod sequencing;
pub mod strategy;

pub use arbitrage::{
    arb_bounds, arbitragable_profit, ensure_centered, is_centered, optimal_single_arb, potential,
    potential_trace, recenter, upper_bound_m, ArbBounds, ArbGeometry, PotentialTrace,
};
pub use curve::{check_axioms, AxiomReport, AxiomViolation, Curve, CurveKind, CurveParams};
pub use error::{Error, Result};
pub use exchange::{
    apply_tx, execute_sequence, miner_profit, standalone_receipt, user_receipts, ExecutionTrace,
    MarketContext, Owner, PoolState, Side, Step, Transaction,
};
pub use report::{analyze, trace_lines, Analysis, StrategyReport, TraceLine};
pub use scalar::{NumericMode, Scalar};
pub use scenario::{
    load_scenario, load_scenario_from_reader, parse_scenario, LoadedScenario, Scenario,
    ScenarioFile,
};
pub use sequencing::{
    greedy_order, greedy_permutation, verify_gsr, verify_order, OrderWitness, TieBreak, Violation,
    ViolationReason,
};
pub use strategy::{
    achieves_upper_bound, brute_force_optimal, gen_partition_instance, optimal_f0,
    reduce_partition, solve_partition_via_mev, Decision, PartitionInstance, PlanStep,
    ReductionOutcome, SearchConfig, Strategy,
};
