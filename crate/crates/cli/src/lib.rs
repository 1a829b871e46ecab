//! `gsrmev` command-line front end.
//!
//! Every command prints one JSON document on standard output. Exit codes:
//! 0 success, 2 bad input, 3 a negative answer (invalid order, decision
//! false, axiom failure), 4 instance too large for the search, 1 internal
//! error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gsrmev_core::report::{analyze, trace_lines, StrategyReport};
use gsrmev_core::scalar::Scalar;
use gsrmev_core::{
    achieves_upper_bound, brute_force_optimal, check_axioms, execute_sequence, load_scenario,
    load_scenario_from_reader, miner_profit, optimal_f0, reduce_partition, upper_bound_m,
    verify_gsr, verify_order, CurveParams, Error, LoadedScenario, Scenario, SearchConfig,
};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "gsrmev",
    version,
    about = "Miner profit under the greedy sequencing rule"
)]
pub struct Cli {
    /// Worker threads for the exhaustive search.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Print a human-readable summary on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an execution order against the sequencing rule.
    Verify {
        /// Scenario file, or `-` for stdin.
        scenario: PathBuf,
        /// Comma-separated transaction indices; defaults to file order.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
    },
    /// Execute the scenario's transactions, or a strategy's sequence.
    Execute {
        scenario: PathBuf,
        /// Strategy report whose sequence replaces the scenario's transactions.
        #[arg(long)]
        strategy: Option<PathBuf>,
        /// Write the step-by-step trace here as JSON lines.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Arbitrage bounds, per-transaction arbitragable profit, M and phi(s0).
    Analyze { scenario: PathBuf },
    /// Best miner strategy.
    Optimize {
        scenario: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Whether some strategy earns exactly M.
    Decide {
        scenario: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Solve Partition through the miner-profit decision problem.
    Reduce {
        /// Positive integers to split into two equal-sum halves.
        #[arg(required = true)]
        integers: Vec<u64>,
        /// Pool fee; `sqrt(1 - fee)` must be rational.
        #[arg(long, default_value = "19/100")]
        fee: String,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check the curve axioms on a sample grid.
    Axioms {
        /// Curve constant.
        #[arg(long, default_value = "10000")]
        k: String,
        /// Smallest X reserve sampled.
        #[arg(long, default_value = "1")]
        lo: String,
        /// Largest X reserve sampled.
        #[arg(long, default_value = "1000000")]
        hi: String,
        /// Number of evenly spaced sample points.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Largest accepted relative error of the finite-difference slope.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
        /// Sample with exact rationals instead of f64.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Largest number of user transactions the exhaustive search accepts.
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    /// Extra X-reserve levels for miner trades (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<String>,
}

impl SearchArgs {
    fn config<S: Scalar>(&self, threads: usize) -> Result<SearchConfig<S>, Error> {
        Ok(SearchConfig {
            max_n: self.max_n,
            extra_grid: self
                .grid
                .iter()
                .map(|g| S::parse(g))
                .collect::<Result<_, _>>()?,
            threads: threads.max(1),
        })
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub code: i32,
    pub summary: String,
}

impl Outcome {
    fn new(report: impl Serialize, code: i32, summary: impl Into<String>) -> Self {
        Self {
            report: serde_json::to_value(report).expect("reports serialize"),
            code,
            summary: summary.into(),
        }
    }
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::TooLarge { .. } => EXIT_TOO_LARGE,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

/// Parses `args`, runs the command and writes the report. Returns the exit
/// code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            let report = if code == EXIT_OK {
                json!({ "help": e.to_string() })
            } else {
                json!({ "error": e.to_string() })
            };
            let _ = writeln!(stdout, "{report}");
            return code;
        }
    };
    let outcome = match dispatch(&cli) {
        Ok(outcome) => outcome,
        Err(err) => Outcome::new(
            json!({ "error": err.to_string() }),
            exit_code(&err),
            err.to_string(),
        ),
    };
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(&outcome.report).expect("json values print")
    );
    if cli.verbose || outcome.code == EXIT_INPUT || outcome.code == EXIT_INTERNAL {
        let _ = writeln!(stderr, "{}", outcome.summary);
    }
    outcome.code
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut io::stdout(), &mut io::stderr())
}

fn read_scenario(path: &Path) -> Result<LoadedScenario, Error> {
    if path.as_os_str() == "-" {
        load_scenario_from_reader(io::stdin().lock())
    } else {
        load_scenario(path)
    }
}

/// Runs `$body` with `$s` bound to the scenario in its numeric mode.
macro_rules! with_scenario {
    ($loaded:expr, $s:ident => $body:expr) => {
        match $loaded {
            LoadedScenario::Exact($s) => $body,
            LoadedScenario::Float($s) => $body,
        }
    };
}

pub fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Verify { scenario, order } => {
            let loaded = read_scenario(scenario)?;
            with_scenario!(&loaded, s => verify(s, order.as_deref()))
        }
        Command::Execute {
            scenario,
            strategy,
            trace_out,
        } => {
            let loaded = read_scenario(scenario)?;
            with_scenario!(&loaded, s => execute(s, strategy.as_deref(), trace_out.as_deref()))
        }
        Command::Analyze { scenario } => {
            let loaded = read_scenario(scenario)?;
            with_scenario!(&loaded, s => {
                let a = analyze(&s.initial_state, &s.transactions, &s.curve, &s.market)?;
                let summary = format!(
                    "[L_x, R_x] = [{}, {}], M = {}",
                    a.lower,
                    a.upper,
                    a.m.as_deref().unwrap_or("undefined (start not centered)")
                );
                Ok(Outcome::new(a, EXIT_OK, summary))
            })
        }
        Command::Optimize { scenario, search } => {
            let loaded = read_scenario(scenario)?;
            with_scenario!(&loaded, s => optimize(s, &search.config(cli.threads)?))
        }
        Command::Decide { scenario, search } => {
            let loaded = read_scenario(scenario)?;
            with_scenario!(&loaded, s => decide(s, &search.config(cli.threads)?))
        }
        Command::Reduce {
            integers,
            fee,
            search,
        } => reduce(integers, fee, &search.config(cli.threads)?),
        Command::Axioms {
            k,
            lo,
            hi,
            samples,
            tolerance,
            exact,
        } => {
            if *exact {
                axioms::<BigRational>(k, lo, hi, *samples, *tolerance)
            } else {
                axioms::<f64>(k, lo, hi, *samples, *tolerance)
            }
        }
    }
}

fn verify<S: Scalar>(s: &Scenario<S>, order: Option<&[usize]>) -> Result<Outcome, Error> {
    let fee = s.market.fee();
    let witness = match order {
        Some(order) => verify_order(&s.initial_state, &s.transactions, order, &s.curve, fee)?,
        None => verify_gsr(&s.initial_state, &s.transactions, &s.curve, fee)?,
    };
    let (code, summary) = match &witness.first_violation {
        None => (EXIT_OK, "order satisfies the sequencing rule".to_string()),
        Some(v) => (
            EXIT_NEGATIVE,
            format!(
                "order violates the rule at position {} ({:?})",
                v.position, v.reason
            ),
        ),
    };
    Ok(Outcome::new(witness, code, summary))
}

fn execute<S: Scalar>(
    s: &Scenario<S>,
    strategy: Option<&Path>,
    trace_out: Option<&Path>,
) -> Result<Outcome, Error> {
    let txs = match strategy {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| invalid("strategy", format!("{}: {e}", path.display())))?;
            let report: StrategyReport =
                serde_json::from_str(&text).map_err(|e| invalid("strategy", e.to_string()))?;
            report.transactions()?
        }
        None => s.transactions.clone(),
    };
    let witness = verify_gsr(&s.initial_state, &txs, &s.curve, s.market.fee())?;
    let trace = execute_sequence(&s.initial_state, &txs, &s.curve, &s.market)?;
    let profit = miner_profit(&trace, &s.market);
    if let Some(path) = trace_out {
        let mut out = String::new();
        for line in trace_lines(&trace) {
            out.push_str(&serde_json::to_string(&line).expect("trace lines serialize"));
            out.push('\n');
        }
        fs::write(path, out)
            .map_err(|e| invalid("trace-out", format!("{}: {e}", path.display())))?;
    }
    let end = trace.final_state();
    let summary = format!(
        "executed {} transactions, miner profit {}",
        txs.len(),
        profit.render()
    );
    Ok(Outcome::new(
        json!({
            "steps": txs.len(),
            "profit": profit.render(),
            "final_state": { "x": end.x.render(), "y": end.y.render() },
            "gsr_valid": witness.valid,
            "first_violation": witness.first_violation,
        }),
        EXIT_OK,
        summary,
    ))
}

fn optimize<S: Scalar>(s: &Scenario<S>, config: &SearchConfig<S>) -> Result<Outcome, Error> {
    let upper = upper_bound_m(&s.initial_state, &s.transactions, &s.curve, &s.market)?;
    let strategy = if s.market.fee().is_zero() {
        optimal_f0(&s.initial_state, &s.transactions, &s.curve, &s.market)?
    } else {
        brute_force_optimal(
            &s.initial_state,
            &s.transactions,
            &s.curve,
            &s.market,
            config,
        )?
    };
    let report = StrategyReport::new(&strategy, &upper);
    let summary = format!(
        "profit {} of upper bound {} using {} of {} user transactions",
        report.profit,
        report.upper_bound,
        report.subset.len(),
        s.transactions.len()
    );
    Ok(Outcome::new(report, EXIT_OK, summary))
}

#[derive(Serialize)]
struct DecisionReport {
    achieved: bool,
    #[serde(flatten)]
    strategy: StrategyReport,
}

fn decide<S: Scalar>(s: &Scenario<S>, config: &SearchConfig<S>) -> Result<Outcome, Error> {
    let d = achieves_upper_bound(
        &s.initial_state,
        &s.transactions,
        &s.curve,
        &s.market,
        config,
    )?;
    let report = DecisionReport {
        achieved: d.achieved,
        strategy: StrategyReport::new(&d.best, &d.upper_bound),
    };
    let (code, summary) = if d.achieved {
        (
            EXIT_OK,
            format!("M = {} is achievable", report.strategy.upper_bound),
        )
    } else {
        (
            EXIT_NEGATIVE,
            format!(
                "M = {} is not achievable; best is {}",
                report.strategy.upper_bound, report.strategy.profit
            ),
        )
    };
    Ok(Outcome::new(report, code, summary))
}

fn reduce(
    integers: &[u64],
    fee: &str,
    config: &SearchConfig<BigRational>,
) -> Result<Outcome, Error> {
    let fee = BigRational::parse(fee)?;
    let outcome = reduce_partition(integers, fee, config)?;
    let total: u64 = integers.iter().sum();
    let half_sum = BigRational::from_ratio(total as i64, 2).render();
    let subset_values = outcome
        .subset
        .as_ref()
        .map(|s| s.iter().map(|&i| integers[i]).collect::<Vec<_>>());
    let strategy = outcome
        .decision
        .as_ref()
        .map(|d| StrategyReport::new(&d.best, &d.upper_bound));
    let found = outcome.subset.is_some();
    let summary = match &subset_values {
        Some(values) => format!("balanced partition found: {values:?} sums to {half_sum}"),
        None => format!("no subset sums to {half_sum}"),
    };
    Ok(Outcome::new(
        json!({
            "integers": integers,
            "half_sum": half_sum,
            "partition_exists": found,
            "subset": outcome.subset,
            "subset_values": subset_values,
            "q_star": outcome.instance.as_ref().map(|i| i.q_star.render()),
            "strategy": strategy,
        }),
        if found { EXIT_OK } else { EXIT_NEGATIVE },
        summary,
    ))
}

fn axioms<S: Scalar>(
    k: &str,
    lo: &str,
    hi: &str,
    samples: usize,
    tolerance: f64,
) -> Result<Outcome, Error> {
    let curve = CurveParams::constant_product(S::parse(k)?)?;
    let report = check_axioms(&curve, &S::parse(lo)?, &S::parse(hi)?, samples)?;
    let derivative_ok = report.max_derivative_rel_err <= tolerance;
    let passed = report.passed() && derivative_ok;
    let summary = format!(
        "{} samples: axioms {}, worst slope error {:.3e}",
        report.samples,
        if report.passed() { "hold" } else { "violated" },
        report.max_derivative_rel_err
    );
    Ok(Outcome::new(
        json!({ "passed": passed, "derivative_within_tolerance": derivative_ok, "report": report }),
        if passed { EXIT_OK } else { EXIT_NEGATIVE },
        summary,
    ))
}

fn invalid(field: &str, reason: String) -> Error {
    Error::Invalid {
        field: field.into(),
        reason,
    }
}
