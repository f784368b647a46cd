//! Batch command-line interface: JSON system documents in, deterministic
//! JSON reports out.
//!
//! Exit codes: 0 success (or "bisimilar"/"accepted"), 1 negative verdict,
//! 2 unknown or — under `--strict` — any non-exact status, 3 parse or
//! validation failure.

pub mod document;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::bisim::{
    self, BisimOptions, BisimStatus, Partition, Witness,
};
use crate::error::Error;
use crate::saturation::{saturate, SolveConfig, SolveMode, SolveStatus};
use crate::segala::{
    self, cm_saturate, CmStatus, ConvexSystem, ConvexWitness, PairAnswer,
};
use crate::semiring::{default_samples, parse_rational, validate_semiring, LawReport, Semiring};
use crate::wlts::System;
use crate::Result;
use document::{load_system, parse_algebra, system_to_value, to_dot, ParsedSystem};

/// Default iteration cap for convex (segala) solves.
pub const SEGALA_DEFAULT_CAP: usize = 64;

#[derive(Parser, Debug)]
#[command(
    name = "tausat",
    version,
    about = "Saturation and weak/strong behavioural equivalence for transition systems with unobservable moves"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the τ-saturation (free monad) of a system and emit it.
    Saturate {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
        /// Also write the saturated system as a DOT digraph (τ edges dashed).
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Greatest weak bisimulation by partition refinement.
    WeakBisim {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Greatest strong bisimulation (no saturation).
    StrongBisim {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Compare the initial states of two systems on their disjoint union.
    /// Exit 0 bisimilar, 1 not, 2 unknown, 3 error.
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Check whether a partition file (JSON blocks of state names) is a weak
    /// bisimulation for the system.
    CheckPartition {
        input: PathBuf,
        /// Partition document: [["x","y"],["z"]]
        #[arg(long)]
        partition: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Quotient the system by its greatest weak bisimulation.
    Minimize {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run the semiring and label-algebra law reports for a document.
    Validate {
        input: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// Solver strategy: auto | closure | policy | iterate.
    #[arg(long, default_value = "auto")]
    mode: String,
    /// Iterate-mode convergence threshold, an exact literal like 1e-12.
    #[arg(long, default_value = "1e-12")]
    epsilon: String,
    /// Row-comparison threshold when the solver is not exact.
    #[arg(long, default_value = "1e-9")]
    delta: String,
    /// Iteration cap (default 10000; 64 for segala documents).
    #[arg(long)]
    cap: Option<usize>,
    /// Exit 2 whenever the status is not exact.
    #[arg(long)]
    strict: bool,
    /// Omit the timing field so reports are byte-deterministic.
    #[arg(long)]
    no_timing: bool,
}

impl CommonOpts {
    fn run_options(&self) -> RunOptions {
        RunOptions {
            mode: self.mode.clone(),
            epsilon: self.epsilon.clone(),
            delta: self.delta.clone(),
            cap: self.cap,
        }
    }
}

/// Engine options shared by the CLI flags and the C API (where they arrive
/// as a JSON object with the same field names and defaults).
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Solver strategy: auto | closure | policy | iterate.
    pub mode: String,
    /// Iterate-mode convergence threshold (exact literal).
    pub epsilon: String,
    /// Row-comparison threshold when the solver is not exact.
    pub delta: String,
    /// Iteration cap (10000 for weighted solves, 64 for segala when unset).
    pub cap: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: "auto".into(),
            epsilon: "1e-12".into(),
            delta: "1e-9".into(),
            cap: None,
        }
    }
}

impl RunOptions {
    fn solve_config(&self) -> Result<SolveConfig> {
        let mode: SolveMode = self.mode.parse()?;
        let epsilon = parse_rational(&self.epsilon)
            .ok_or_else(|| Error::InvalidConfig(format!("bad epsilon {:?}", self.epsilon)))?;
        let mut cfg = SolveConfig {
            mode,
            epsilon,
            ..SolveConfig::default()
        };
        if let Some(cap) = self.cap {
            cfg.cap = cap;
        }
        Ok(cfg)
    }

    fn bisim_options(&self) -> Result<BisimOptions> {
        let solve = self.solve_config()?;
        let delta = parse_rational(&self.delta)
            .ok_or_else(|| Error::InvalidConfig(format!("bad delta {:?}", self.delta)))?;
        Ok(BisimOptions { solve, delta })
    }

    fn segala_cap(&self) -> usize {
        self.cap.unwrap_or(SEGALA_DEFAULT_CAP)
    }
}

/// The report printed on stdout. Field order is fixed; absent fields are
/// omitted, so identical inputs and flags produce identical bytes (timing is
/// dropped under `--no-timing`).
#[derive(Serialize, Debug, Default)]
pub struct Report {
    command: String,
    inputs: Vec<String>,
    mode: String,
    semiring: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    partition: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificates: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    infinite_cells: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    laws: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing_ms: Option<u128>,
}

impl Report {
    fn new(command: &str, ro: &RunOptions, semiring: String) -> Report {
        Report {
            command: command.to_string(),
            inputs: Vec::new(),
            mode: ro.mode.clone(),
            semiring,
            ..Report::default()
        }
    }

    fn with_inputs(mut self, inputs: &[&Path]) -> Report {
        self.inputs = inputs.iter().map(|p| p.display().to_string()).collect();
        self
    }

    pub fn status(&self) -> Option<&str> {
        self.status.as_deref()
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

fn solve_status_fields(report: &mut Report, status: &SolveStatus, iterations: usize) {
    report.iterations = Some(iterations);
    match status {
        SolveStatus::Exact => report.status = Some("exact".into()),
        SolveStatus::Converged { residual } => {
            report.status = Some("approximate".into());
            report.residual = Some(crate::semiring::Weight::Rat(residual.clone()).to_string());
        }
        SolveStatus::Capped { .. } => report.status = Some("approximate".into()),
    }
}

fn bisim_status_fields(report: &mut Report, status: &BisimStatus) {
    match status {
        BisimStatus::Exact => report.status = Some("exact".into()),
        BisimStatus::Approximate { delta } => {
            report.status = Some("approximate".into());
            report.delta = Some(crate::semiring::Weight::Rat(delta.clone()).to_string());
        }
    }
}

fn witness_value(w: &Witness, sys: &System) -> Value {
    let states = sys.states();
    let mut block_names: Vec<String> = w.block.iter().map(|&s| states.name(s).to_string()).collect();
    block_names.sort();
    json!({
        "left": states.name(w.left),
        "right": states.name(w.right),
        "label": sys.algebra().name(w.label),
        "block": block_names,
        "left_weight": w.left_weight.to_string(),
        "right_weight": w.right_weight.to_string(),
    })
}

fn convex_witness_value(w: &ConvexWitness, sys: &ConvexSystem) -> Value {
    let states = sys.states();
    let cells: Vec<Value> = w
        .generator
        .iter()
        .map(|((l, b), v)| {
            json!({
                "label": sys.algebra().name(*l),
                "to": w.block_names.get(*b).cloned().unwrap_or_default(),
                "weight": crate::semiring::Weight::Rat(v.clone()).to_string(),
            })
        })
        .collect();
    json!({
        "left": states.name(w.left),
        "right": states.name(w.right),
        "owner": states.name(w.owner),
        "generator": cells,
    })
}

fn infinite_cells_value(sys: &System, cells: &std::collections::BTreeSet<crate::wlts::Cell>) -> Option<Value> {
    if cells.is_empty() {
        return None;
    }
    Some(Value::Array(
        cells
            .iter()
            .map(|(x, a, y)| {
                json!([
                    sys.states().name(*x),
                    sys.algebra().name(*a),
                    sys.states().name(*y)
                ])
            })
            .collect(),
    ))
}

fn law_report_value(r: &LawReport) -> Value {
    Value::Array(
        r.checks
            .iter()
            .map(|c| {
                let mut o = json!({ "law": c.law.to_string(), "passed": c.passed });
                if let Some(w) = &c.witness {
                    o["witness"] = Value::String(w.clone());
                }
                o
            })
            .collect(),
    )
}

/// A command result: the process exit code (before `--strict` adjustment)
/// and the report to print.
pub struct Outcome {
    pub code: i32,
    pub report: Report,
}

fn strict_code(code: i32, strict: bool, report: &Report) -> i32 {
    if code == 0 && strict && report.status.as_deref() != Some("exact") {
        2
    } else {
        code
    }
}

/// Saturates a parsed system; also returns the saturated system itself (for
/// DOT rendering).
pub fn run_saturate(parsed: &ParsedSystem, ro: &RunOptions) -> Result<(Outcome, ParsedSystem)> {
    let mut report = Report::new("saturate", ro, parsed.kind_name());
    let saturated = match parsed {
        ParsedSystem::Weighted(sys) => {
            let cfg = ro.solve_config()?;
            let res = saturate(sys, &cfg)?;
            solve_status_fields(&mut report, &res.status, res.iterations);
            report.infinite_cells = infinite_cells_value(sys, &res.infinite_cells);
            let out = System::new(res.value)?;
            let out = match sys.initial() {
                Some(i) => out.with_initial(i)?,
                None => out,
            };
            ParsedSystem::Weighted(out)
        }
        ParsedSystem::Segala(sys) => {
            let (value, status, depth) = cm_saturate(sys, ro.segala_cap())?;
            report.status = Some(match status {
                CmStatus::Exact => "exact".into(),
                CmStatus::Capped { .. } => "unknown".into(),
            });
            report.iterations = Some(depth);
            let out = ConvexSystem::new(value)?;
            let out = match sys.initial() {
                Some(i) => out.with_initial(i)?,
                None => out,
            };
            ParsedSystem::Segala(out)
        }
    };
    report.system = Some(system_to_value(&saturated));
    Ok((Outcome { code: 0, report }, saturated))
}

fn cmd_saturate(input: &Path, opts: &CommonOpts, dot: Option<&Path>) -> Result<Outcome> {
    let parsed = load_system(input)?;
    let (mut outcome, saturated) = run_saturate(&parsed, &opts.run_options())?;
    if let Some(path) = dot {
        std::fs::write(path, to_dot(&saturated))?;
    }
    outcome.report = outcome.report.with_inputs(&[input]);
    outcome.code = strict_code(outcome.code, opts.strict, &outcome.report);
    Ok(outcome)
}

fn partition_names(p: &Partition, states: &crate::wlts::StateSpace) -> Vec<Vec<String>> {
    p.named_blocks(states)
}

/// Greatest weak bisimulation of a parsed system.
pub fn run_weak_bisim(parsed: &ParsedSystem, ro: &RunOptions) -> Result<Outcome> {
    let mut report = Report::new("weak-bisim", ro, parsed.kind_name());
    match parsed {
        ParsedSystem::Weighted(sys) => {
            let verdict = bisim::greatest_weak_bisim(sys, &ro.bisim_options()?)?;
            bisim_status_fields(&mut report, &verdict.status);
            report.partition = Some(partition_names(&verdict.partition, sys.states()));
        }
        ParsedSystem::Segala(sys) => {
            let verdict = segala::weak_convex_bisim(sys, ro.segala_cap())?;
            report.status = Some(if verdict.exact { "exact" } else { "unknown" }.into());
            report.partition = Some(partition_names(&verdict.partition, sys.states()));
            report.certificates = Some(Value::Array(
                verdict
                    .distinguished
                    .iter()
                    .map(|(_, _, depth, w)| {
                        let mut v = convex_witness_value(w, sys);
                        v["depth"] = json!(depth);
                        v
                    })
                    .collect(),
            ));
        }
    }
    Ok(Outcome { code: 0, report })
}

fn cmd_weak_bisim(input: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let parsed = load_system(input)?;
    let mut outcome = run_weak_bisim(&parsed, &opts.run_options())?;
    outcome.report = outcome.report.with_inputs(&[input]);
    outcome.code = strict_code(outcome.code, opts.strict, &outcome.report);
    Ok(outcome)
}

/// Greatest strong bisimulation of a parsed system.
pub fn run_strong_bisim(parsed: &ParsedSystem, ro: &RunOptions) -> Result<Outcome> {
    let mut report = Report::new("strong-bisim", ro, parsed.kind_name());
    match parsed {
        ParsedSystem::Weighted(sys) => {
            let verdict = bisim::greatest_strong_bisim(sys)?;
            bisim_status_fields(&mut report, &verdict.status);
            report.partition = Some(partition_names(&verdict.partition, sys.states()));
        }
        ParsedSystem::Segala(sys) => {
            let verdict = segala::strong_convex_bisim(sys)?;
            report.status = Some("exact".into());
            report.partition = Some(partition_names(&verdict.partition, sys.states()));
        }
    }
    Ok(Outcome { code: 0, report })
}

fn cmd_strong_bisim(input: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let parsed = load_system(input)?;
    let mut outcome = run_strong_bisim(&parsed, &opts.run_options())?;
    outcome.report = outcome.report.with_inputs(&[input]);
    outcome.code = strict_code(outcome.code, opts.strict, &outcome.report);
    Ok(outcome)
}

/// Compares the initial states of two parsed systems. Exit code 0 means
/// bisimilar, 1 distinguished, 2 unknown.
pub fn run_compare(a: &ParsedSystem, b: &ParsedSystem, ro: &RunOptions) -> Result<Outcome> {
    let mut report = Report::new("compare", ro, a.kind_name());
    let code = match (a, b) {
        (ParsedSystem::Weighted(a), ParsedSystem::Weighted(b)) => {
            let verdict = bisim::compare(a, b, &ro.bisim_options()?)?;
            bisim_status_fields(&mut report, &verdict.status);
            report.partition = Some(partition_names(&verdict.partition, verdict.system.states()));
            report.verdict = Some(
                if verdict.bisimilar {
                    "bisimilar"
                } else {
                    "not_bisimilar"
                }
                .into(),
            );
            if let Some(w) = &verdict.witness {
                report.witness = Some(witness_value(w, &verdict.system));
            }
            if verdict.bisimilar {
                0
            } else {
                1
            }
        }
        (ParsedSystem::Segala(a), ParsedSystem::Segala(b)) => {
            let i1 = a
                .initial()
                .ok_or_else(|| Error::MissingInitial("the left document".into()))?;
            let i2 = b
                .initial()
                .ok_or_else(|| Error::MissingInitial("the right document".into()))?;
            let (sum, offset) = ConvexSystem::coproduct(a, b)?;
            let verdict = segala::weak_convex_bisim(&sum, ro.segala_cap())?;
            report.status = Some(if verdict.exact { "exact" } else { "unknown" }.into());
            report.partition = Some(partition_names(&verdict.partition, sum.states()));
            match verdict.answer(i1, i2 + offset) {
                PairAnswer::BisimilarExact => {
                    report.verdict = Some("bisimilar".into());
                    0
                }
                PairAnswer::Distinguished { depth, witness } => {
                    report.verdict = Some("not_bisimilar".into());
                    let mut v = convex_witness_value(&witness, &sum);
                    v["depth"] = json!(depth);
                    report.witness = Some(v);
                    1
                }
                PairAnswer::Unknown { .. } => {
                    report.verdict = Some("unknown".into());
                    2
                }
            }
        }
        _ => {
            return Err(Error::ShapeMismatch(
                "compare: one document is segala, the other weighted".into(),
            ))
        }
    };
    Ok(Outcome { code, report })
}

fn cmd_compare(left: &Path, right: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let a = load_system(left)?;
    let b = load_system(right)?;
    let mut outcome = run_compare(&a, &b, &opts.run_options())?;
    outcome.report = outcome.report.with_inputs(&[left, right]);
    outcome.code = strict_code(outcome.code, opts.strict, &outcome.report);
    Ok(outcome)
}

/// Checks a partition document (array of blocks of state names) against a
/// parsed system. Exit code 0 accepted, 1 rejected.
pub fn run_check_partition(
    parsed: &ParsedSystem,
    partition: &Value,
    ro: &RunOptions,
) -> Result<Outcome> {
    let p = document::parse_partition(partition, parsed.states())?;
    let mut report = Report::new("check-partition", ro, parsed.kind_name());
    report.partition = Some(partition_names(&p, parsed.states()));
    let accepted = match parsed {
        ParsedSystem::Weighted(sys) => {
            let bopts = ro.bisim_options()?;
            let sat = saturate(sys, &bopts.solve)?;
            report.status = Some(if sat.status.is_exact() {
                "exact".into()
            } else {
                "approximate".into()
            });
            bisim::is_weak_bisim(sys, &p, &bopts)?
        }
        ParsedSystem::Segala(sys) => {
            let (accepted, exact) = segala::is_weak_convex_bisim(sys, &p, ro.segala_cap())?;
            report.status = Some(if exact { "exact" } else { "unknown" }.into());
            accepted
        }
    };
    report.verdict = Some(if accepted { "accepted" } else { "rejected" }.into());
    Ok(Outcome {
        code: if accepted { 0 } else { 1 },
        report,
    })
}

fn cmd_check_partition(input: &Path, partition: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let parsed = load_system(input)?;
    let ptext = std::fs::read_to_string(partition)?;
    let pvalue: Value = serde_json::from_str(&ptext)?;
    let mut outcome = run_check_partition(&parsed, &pvalue, &opts.run_options())?;
    outcome.report = outcome.report.with_inputs(&[input, partition]);
    outcome.code = strict_code(outcome.code, opts.strict, &outcome.report);
    Ok(outcome)
}

/// Quotients a parsed system by its greatest weak bisimulation; refuses
/// non-exact verdicts.
pub fn run_minimize(parsed: &ParsedSystem, ro: &RunOptions) -> Result<Outcome> {
    let mut report = Report::new("minimize", ro, parsed.kind_name());
    let minimized = match parsed {
        ParsedSystem::Weighted(sys) => {
            let min = bisim::minimize(sys, &ro.bisim_options()?)?;
            report.status = Some("exact".into());
            ParsedSystem::Weighted(min)
        }
        ParsedSystem::Segala(sys) => {
            let min = segala::cm_minimize(sys, ro.segala_cap())?;
            report.status = Some("exact".into());
            ParsedSystem::Segala(min)
        }
    };
    report.partition = Some(
        minimized
            .states()
            .names()
            .iter()
            .map(|n| n.split('+').map(str::to_string).collect())
            .collect(),
    );
    report.system = Some(system_to_value(&minimized));
    Ok(Outcome { code: 0, report })
}

fn cmd_minimize(input: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let parsed = load_system(input)?;
    let mut outcome = run_minimize(&parsed, &opts.run_options())?;
    outcome.report = outcome.report.with_inputs(&[input]);
    Ok(outcome)
}

/// Runs the law reports for a raw document value (which may carry an
/// algebra that fails its laws — that is the point of validating).
pub fn run_validate(value: &Value) -> Result<Outcome> {
    let doc = value
        .as_object()
        .ok_or_else(|| Error::document("document", "expected an object"))?;
    let kind_str = doc
        .get("semiring")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::document("semiring", "missing or not a string"))?;
    let algebra = parse_algebra(doc)?;
    let algebra_report = algebra.validate();
    let mut laws = serde_json::Map::new();
    let mut all_passed = algebra_report.all_passed();
    laws.insert("label_algebra".into(), law_report_value(&algebra_report));
    if kind_str != "segala" {
        let kind: crate::semiring::SemiringKind = kind_str.parse()?;
        let semiring_report = validate_semiring(&Semiring::new(kind), &default_samples(kind));
        all_passed &= semiring_report.all_passed();
        laws.insert("semiring".into(), law_report_value(&semiring_report));
    }
    let mut report = Report::new("validate", &RunOptions::default(), kind_str.to_string());
    report.laws = Some(Value::Object(laws));
    report.verdict = Some(if all_passed { "accepted" } else { "rejected" }.into());
    Ok(Outcome {
        code: if all_passed { 0 } else { 2 },
        report,
    })
}

fn cmd_validate(input: &Path, opts: &CommonOpts) -> Result<Outcome> {
    let text = std::fs::read_to_string(input)?;
    let value: Value = serde_json::from_str(&text)?;
    let mut outcome = run_validate(&value)?;
    outcome.report.mode = opts.mode.clone();
    outcome.report = outcome.report.with_inputs(&[input]);
    Ok(outcome)
}

fn dispatch(command: &Command) -> Result<(Outcome, bool)> {
    match command {
        Command::Saturate { input, opts, dot } => {
            Ok((cmd_saturate(input, opts, dot.as_deref())?, opts.no_timing))
        }
        Command::WeakBisim { input, opts } => Ok((cmd_weak_bisim(input, opts)?, opts.no_timing)),
        Command::StrongBisim { input, opts } => {
            Ok((cmd_strong_bisim(input, opts)?, opts.no_timing))
        }
        Command::Compare { left, right, opts } => {
            Ok((cmd_compare(left, right, opts)?, opts.no_timing))
        }
        Command::CheckPartition {
            input,
            partition,
            opts,
        } => Ok((cmd_check_partition(input, partition, opts)?, opts.no_timing)),
        Command::Minimize { input, opts } => Ok((cmd_minimize(input, opts)?, opts.no_timing)),
        Command::Validate { input, opts } => Ok((cmd_validate(input, opts)?, opts.no_timing)),
    }
}

fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::ApproximateVerdict { .. } => 2,
        _ => 3,
    }
}

/// Runs a full command line (excluding argv[0] handling — pass everything).
/// Returns the exit code and the stdout payload.
pub fn run_from<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with code 0
            let msg = e.render().to_string();
            return (if e.use_stderr() { 3 } else { 0 }, msg);
        }
    };
    let start = Instant::now();
    match dispatch(&cli.command) {
        Ok((mut outcome, no_timing)) => {
            if !no_timing {
                outcome.report.timing_ms = Some(start.elapsed().as_millis());
            }
            let text = serde_json::to_string_pretty(&outcome.report)
                .expect("report serialization is infallible");
            (outcome.code, text + "\n")
        }
        Err(e) => {
            let code = error_exit_code(&e);
            (code, format!("error: {e}\n"))
        }
    }
}

/// Binary entry point: parse from the environment, print, return the code.
pub fn run() -> i32 {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let (code, output) = run_from(args);
    if code == 3 || code == 2 && output.starts_with("error:") {
        eprint!("{output}");
    } else {
        print!("{output}");
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_doc(dir: &std::path::Path, name: &str, value: Value) -> PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
        path
    }

    fn bh_doc() -> Value {
        json!({
            "semiring": "arith",
            "states": ["x", "y", "z"],
            "initial": "x",
            "transitions": [
                {"from": "x", "label": "tau", "to": "x", "weight": "1/4"},
                {"from": "x", "label": "tau", "to": "z", "weight": "3/4"},
                {"from": "y", "label": "tau", "to": "y", "weight": "3/4"},
                {"from": "y", "label": "tau", "to": "z", "weight": "1/4"}
            ]
        })
    }

    #[test]
    fn weak_bisim_policy_report() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(dir.path(), "bh.json", bh_doc());
        let (code, out) = run_from([
            "tausat",
            "weak-bisim",
            doc.to_str().unwrap(),
            "--mode",
            "policy",
            "--no-timing",
        ]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["status"], "exact");
        assert_eq!(report["partition"], json!([["x", "y"], ["z"]]));
        assert!(report.get("timing_ms").is_none());
    }

    #[test]
    fn reports_are_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(dir.path(), "bh.json", bh_doc());
        let args = [
            "tausat",
            "saturate",
            doc.to_str().unwrap(),
            "--mode",
            "policy",
            "--no-timing",
        ];
        let (c1, out1) = run_from(args);
        let (c2, out2) = run_from(args);
        assert_eq!(c1, 0);
        assert_eq!(c2, 0);
        assert_eq!(out1, out2);
    }

    #[test]
    fn saturate_emits_reparsable_system() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(dir.path(), "bh.json", bh_doc());
        let (code, out) = run_from([
            "tausat",
            "saturate",
            doc.to_str().unwrap(),
            "--mode",
            "policy",
            "--no-timing",
        ]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        let sys = document::parse_system(&report["system"]).unwrap();
        // saturation reaches the terminal state with weight exactly one
        let document::ParsedSystem::Weighted(s) = sys else {
            panic!()
        };
        let z = s.states().index("z").unwrap();
        let x = s.states().index("x").unwrap();
        assert_eq!(
            s.map().get(x, crate::wlts::Label::TAU, z),
            crate::semiring::Weight::int(1)
        );
    }

    #[test]
    fn saturated_boolean_chain_has_six_tau_entries() {
        // 3 reflexive + 2 single steps + 1 two-step composite
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(
            dir.path(),
            "chain.json",
            json!({
                "semiring": "boolean",
                "states": ["x", "y", "z"],
                "transitions": [
                    {"from": "x", "label": "tau", "to": "y"},
                    {"from": "y", "label": "tau", "to": "z"}
                ]
            }),
        );
        let (code, out) = run_from(["tausat", "saturate", doc.to_str().unwrap(), "--no-timing"]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        let transitions = report["system"]["transitions"].as_array().unwrap();
        assert_eq!(transitions.len(), 6);
        assert!(transitions.iter().all(|t| t["label"] == "tau"));
    }

    #[test]
    fn parse_failure_is_exit_three() {
        let dir = tempfile::tempdir().unwrap();
        let mut doc = bh_doc();
        doc["transitions"][0]["weight"] = json!("oops");
        let path = write_doc(dir.path(), "bad.json", doc);
        let (code, out) = run_from(["tausat", "weak-bisim", path.to_str().unwrap()]);
        assert_eq!(code, 3);
        assert!(out.contains("transitions[0].weight"), "{out}");
    }

    #[test]
    fn validate_groupoidal_is_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let doc = json!({
            "semiring": "boolean",
            "labels": ["a", "a^-1", "c"],
            "algebra": "groupoidal",
            "states": ["s"],
            "transitions": []
        });
        let path = write_doc(dir.path(), "group.json", doc);
        let (code, out) = run_from(["tausat", "validate", path.to_str().unwrap(), "--no-timing"]);
        assert_eq!(code, 2, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["verdict"], "rejected");
    }

    #[test]
    fn compare_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_doc(dir.path(), "bh.json", bh_doc());
        let (code, _) = run_from([
            "tausat",
            "compare",
            path.to_str().unwrap(),
            path.to_str().unwrap(),
            "--mode",
            "policy",
        ]);
        assert_eq!(code, 0);

        let a = write_doc(
            dir.path(),
            "a.json",
            json!({
                "semiring": "boolean", "labels": ["a", "b"], "states": ["s"], "initial": "s",
                "transitions": [{"from": "s", "label": "a", "to": "s", "weight": true}]
            }),
        );
        let b = write_doc(
            dir.path(),
            "b.json",
            json!({
                "semiring": "boolean", "labels": ["a", "b"], "states": ["s"], "initial": "s",
                "transitions": [{"from": "s", "label": "b", "to": "s", "weight": true}]
            }),
        );
        let (code, out) = run_from([
            "tausat",
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--no-timing",
        ]);
        assert_eq!(code, 1, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["verdict"], "not_bisimilar");
        assert!(report["witness"].is_object());
    }

    #[test]
    fn check_partition_and_minimize_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(dir.path(), "bh.json", bh_doc());
        let part = dir.path().join("p.json");
        std::fs::write(&part, r#"[["x","y"],["z"]]"#).unwrap();
        let (code, out) = run_from([
            "tausat",
            "check-partition",
            doc.to_str().unwrap(),
            "--partition",
            part.to_str().unwrap(),
            "--mode",
            "policy",
            "--no-timing",
        ]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["verdict"], "accepted");

        let (code, out) = run_from([
            "tausat",
            "minimize",
            doc.to_str().unwrap(),
            "--mode",
            "policy",
            "--no-timing",
        ]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        let min = document::parse_system(&report["system"]).unwrap();
        assert_eq!(min.states().len(), 2);
    }

    #[test]
    fn strict_flag_demotes_approximate_to_two() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(dir.path(), "bh.json", bh_doc());
        let (code, out) = run_from([
            "tausat",
            "weak-bisim",
            doc.to_str().unwrap(),
            "--mode",
            "iterate",
            "--strict",
            "--no-timing",
        ]);
        assert_eq!(code, 2, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["status"], "approximate");
        // the approximately-solved partition still merges x with y
        assert_eq!(report["partition"], json!([["x", "y"], ["z"]]));
    }

    #[test]
    fn segala_weak_bisim_identity_with_certificates() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(
            dir.path(),
            "seg.json",
            json!({
                "semiring": "segala",
                "states": ["x", "y", "z"],
                "transitions": [
                    {"from": "x", "choices": [[
                        {"label": "tau", "to": "z", "weight": "1/2"},
                        {"label": "tau", "to": "x", "weight": "1/2"}]]},
                    {"from": "y", "choices": [[
                        {"label": "tau", "to": "z", "weight": "1/4"},
                        {"label": "tau", "to": "y", "weight": "3/4"}]]}
                ]
            }),
        );
        let (code, out) = run_from([
            "tausat",
            "weak-bisim",
            doc.to_str().unwrap(),
            "--cap",
            "16",
            "--no-timing",
        ]);
        assert_eq!(code, 0, "{out}");
        let report: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(report["status"], "unknown");
        assert_eq!(report["partition"], json!([["x"], ["y"], ["z"]]));
        let certs = report["certificates"].as_array().unwrap();
        assert!(certs
            .iter()
            .any(|c| c["left"] == "x" && c["right"] == "y" && c["depth"] == 16));
    }

    #[test]
    fn minimize_refuses_capped_segala_with_exit_two() {
        let dir = tempfile::tempdir().unwrap();
        let doc = write_doc(
            dir.path(),
            "seg.json",
            json!({
                "semiring": "segala",
                "states": ["x", "z"],
                "transitions": [
                    {"from": "x", "choices": [[
                        {"label": "tau", "to": "z", "weight": "1/2"},
                        {"label": "tau", "to": "x", "weight": "1/2"}]]}
                ]
            }),
        );
        let (code, out) = run_from(["tausat", "minimize", doc.to_str().unwrap(), "--cap", "8"]);
        assert_eq!(code, 2, "{out}");
    }
}
