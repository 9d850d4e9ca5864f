//! Command-line front end.
//!
//! Machine-readable output is newline-delimited JSON on stdout, one object
//! per line tagged by `type`; human-readable summaries go to stderr.
//! Exit codes: 0 accept / pass, 1 reject / fail, 2 usage or config error,
//! 3 inapplicable strategy.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::config::{load_graph, load_toml, RunConfig, StrategySpec, SweepConfig};
use crate::error::ProtocolError;
use crate::protocol::{
    amplify_gap, hoeffding_trials, AmplifyConfig, Decision, Protocol, RunSummary,
    ThresholdRule, TrialRecord,
};
use crate::provers::{honest_strategy, optimal_classical_acceptance, ClassicalAssignment, ProverStrategy, StrategyKind};
use crate::selftest::{self, AuditReport, DerivationOutcome, ExtractionOutcome};
use crate::stats::{trial_seed, Estimate};

pub const EXIT_ACCEPT: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INAPPLICABLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "graphproof", version, about = "Many-prover interactive proofs on graph states")]
pub struct Cli {
    /// Worker threads for trial execution (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amplified interactive proof; exit 0 on ACCEPT, 1 on REJECT.
    Run(RunArgs),
    /// Self-test audit of a strategy; exit 0 iff every residual is in tolerance.
    Audit(AuditArgs),
    /// Exhaustive best classical strategy against the honest value.
    Oracle(OracleArgs),
    /// Acceptance over a (q, eps, theta) grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// `midpoint` or `paper-literal`.
    #[arg(long)]
    pub threshold: Option<ThresholdRule>,
    /// Emit one record per trial before the summary.
    #[arg(long)]
    pub emit_trials: bool,
    /// Include wall time in the summary record.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Run config supplying graph and strategy.
    #[arg(long, conflicts_with_all = ["strategy", "graph"])]
    pub config: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub strategy: Option<PathBuf>,
    #[arg(long, requires = "strategy")]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = selftest::AUDIT_TOL)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Run config; with `--q` the oracle targets the full protocol.
    #[arg(long, conflicts_with = "graph")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "config")]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
}

/// Best classical strategy compared with honest provers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub n: usize,
    pub settings: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub classical: f64,
    pub honest: f64,
    pub gap: f64,
    pub witness: ClassicalAssignment,
    pub witness_bits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub q: f64,
    pub eps: f64,
    pub theta: f64,
    pub seed: u64,
    pub estimate: Estimate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGap {
    pub q: f64,
    pub adversary: StrategyKind,
    pub honest: Estimate,
    pub adversarial: Estimate,
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_gap: Option<f64>,
}

/// Every record the tool emits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Record {
    Trial(TrialRecord),
    Summary(RunSummary),
    Audit(AuditReport),
    Oracle(OracleReport),
    SweepCell(SweepCell),
    SweepGap(SweepGap),
}

pub fn write_record(out: &mut dyn Write, record: &Record) -> io::Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n")
}

/// Parses a record stream written by this tool.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<Record>, ProtocolError> {
    input
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| {
            let line = l.map_err(|e| ProtocolError::Config(e.to_string()))?;
            serde_json::from_str(&line).map_err(|e| ProtocolError::Config(format!("bad record: {e}")))
        })
        .collect()
}

/// Parses `args` and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_ACCEPT
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let body = |out: &mut dyn Write, err: &mut dyn Write| match &cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Audit(a) => cmd_audit(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
    };
    let result = match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be positive".into())),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => {
                let (mut o, mut e) = (Vec::new(), Vec::new());
                let r = pool.install(|| body(&mut o, &mut e));
                let flushed = out.write_all(&o).and_then(|_| err.write_all(&e));
                r.and_then(|code| flushed.map(|_| code).map_err(CliError::from))
            }
            Err(e) => Err(CliError::Usage(e.to_string())),
        },
        None => body(out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Inapplicable(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Inapplicable(_) => EXIT_INAPPLICABLE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Inapplicable(m) => f.write_str(m),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("write failed: {e}"))
    }
}

/// `c_ip` and `s_ip` for `protocol` at `q`: exact honest acceptance and the
/// best classical acceptance, unless given.
pub fn default_bounds(
    protocol: &Protocol,
    q: f64,
    c_ip: Option<f64>,
    s_ip: Option<f64>,
) -> Result<(f64, f64), ProtocolError> {
    let c = match c_ip {
        Some(c) => c,
        None => protocol.acceptance(&honest_strategy(protocol.graph())?, q)?,
    };
    let s = match s_ip {
        Some(s) => s,
        None => protocol.best_classical(q).map(|(s, _)| s).map_err(|e| {
            ProtocolError::Config(format!("cannot derive s_ip ({e}); set it in the config"))
        })?,
    };
    Ok((c, s))
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let start = Instant::now();
    let run = RunConfig::load(&a.config)?;
    let q = a.q.unwrap_or(run.config.q);
    if !(0.0..=1.0).contains(&q) {
        return Err(CliError::Usage(format!("q = {q} outside [0, 1]")));
    }
    let (c_ip, s_ip) = default_bounds(&run.protocol, q, run.config.c_ip, run.config.s_ip)?;
    let trials = match a.trials.or(run.config.trials) {
        Some(t) => t,
        None => hoeffding_trials(c_ip - s_ip, run.config.confidence)?,
    };
    let cfg = AmplifyConfig {
        q,
        trials,
        rule: a.threshold.unwrap_or(run.config.threshold),
        c_ip,
        s_ip,
        master_seed: a.seed.unwrap_or(run.config.seed),
    };
    let outcome = amplify_gap(&run.protocol, &run.strategy, &cfg)?;
    if a.emit_trials {
        for r in outcome.records {
            write_record(out, &Record::Trial(r))?;
        }
    }
    let mut summary = outcome.summary;
    let elapsed = start.elapsed().as_millis() as u64;
    if a.timing {
        summary.wall_time_ms = Some(elapsed);
    }
    render_summary(err, &summary, elapsed)?;
    let code = match summary.decision {
        Decision::Accept => EXIT_ACCEPT,
        Decision::Reject => EXIT_REJECT,
    };
    write_record(out, &Record::Summary(summary))?;
    Ok(code)
}

fn render_summary(err: &mut dyn Write, s: &RunSummary, elapsed_ms: u64) -> io::Result<()> {
    writeln!(
        err,
        "{:?}: M = {} of N = {} (threshold {:.3}, {:?}; c_ip {:.6}, s_ip {:.6}; q {}; seed {})",
        s.decision, s.accepted, s.trials, s.threshold, s.rule, s.c_ip, s.s_ip, s.q, s.master_seed
    )?;
    let row = |err: &mut dyn Write, name: &str, e: &Estimate| {
        writeln!(err, "  {name:<12} {:>8}/{:<8} {:.4}  [{:.4}, {:.4}]", e.successes, e.trials, e.mean, e.ci_low, e.ci_high)
    };
    row(err, "overall", &s.acceptance)?;
    row(err, "TEST", &s.test)?;
    row(err, "CALCULATE", &s.calculate)?;
    for (k, e) in &s.families {
        row(err, k, e)?;
    }
    writeln!(err, "  wall time {elapsed_ms} ms")
}

fn load_audit_inputs(a: &AuditArgs) -> Result<(crate::graph::Graph, ProverStrategy), CliError> {
    match (&a.config, &a.strategy, &a.graph) {
        (Some(c), _, _) => {
            let run = RunConfig::load(c)?;
            Ok((run.protocol.graph().clone(), run.strategy))
        }
        (None, Some(s), Some(g)) => {
            let graph = load_graph(g)?;
            let spec: StrategySpec = load_toml(s)?;
            let strategy = spec.build(&graph).map_err(ProtocolError::from)?;
            Ok((graph, strategy))
        }
        _ => Err(CliError::Usage("audit needs --config or both --strategy and --graph".into())),
    }
}

fn cmd_audit(a: &AuditArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    if a.tolerance.is_nan() || a.tolerance < 0.0 {
        return Err(CliError::Usage("--tolerance must be non-negative".into()));
    }
    let (graph, strategy) = load_audit_inputs(a)?;
    let report = selftest::audit(&graph, &strategy, a.tolerance)?;
    render_audit(err, &report)?;
    let inapplicable = match &report.extraction {
        ExtractionOutcome::Inapplicable { reason } => Some(reason.clone()),
        ExtractionOutcome::Extracted { .. } => None,
    };
    let passed = report.passed;
    write_record(out, &Record::Audit(report))?;
    match inapplicable {
        Some(reason) => Err(CliError::Inapplicable(reason)),
        None if passed => Ok(EXIT_ACCEPT),
        None => Ok(EXIT_REJECT),
    }
}

fn render_audit(err: &mut dyn Write, r: &AuditReport) -> io::Result<()> {
    writeln!(err, "audit of {:?} on {} vertices (tolerance {:e})", r.strategy, r.n, r.tolerance)?;
    writeln!(err, "  max setting deviation {:.3e}", r.max_deviation)?;
    writeln!(err, "  vertex  anticommutation  D+ residual  D- residual")?;
    for v in &r.vertices {
        writeln!(err, "  {:>6}  {:>15.3e}  {:>11.3e}  {:>11.3e}", v.vertex, v.anticommutation, v.d_plus, v.d_minus)?;
    }
    for d in &r.derivations {
        match &d.outcome {
            DerivationOutcome::Residual { residual } => {
                writeln!(err, "  derivation {:?}: residual {residual:.3e}", d.triangle)?
            }
            DerivationOutcome::Inconclusive { reason } => {
                writeln!(err, "  derivation {:?}: inconclusive ({reason})", d.triangle)?
            }
        }
    }
    match &r.extraction {
        ExtractionOutcome::Extracted { fidelity } => writeln!(err, "  extraction fidelity {fidelity:.12}")?,
        ExtractionOutcome::Inapplicable { reason } => writeln!(err, "  extraction inapplicable: {reason}")?,
    }
    writeln!(err, "  {}", if r.passed { "PASS" } else { "FAIL" })
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let report = match (&a.config, &a.graph) {
        (Some(c), _) => {
            let run = RunConfig::load(c)?;
            let p = &run.protocol;
            match a.q {
                Some(q) => {
                    if !(0.0..=1.0).contains(&q) {
                        return Err(CliError::Usage(format!("q = {q} outside [0, 1]")));
                    }
                    let (classical, witness) = p.best_classical(q)?;
                    let honest = p.acceptance(&honest_strategy(p.graph()).map_err(ProtocolError::from)?, q)?;
                    oracle_report(p.graph().n(), p.settings().len(), Some(q), Some(p.pattern().name()), classical, honest, witness)
                }
                None => test_oracle(p.graph())?,
            }
        }
        (None, Some(g)) => test_oracle(&load_graph(g)?)?,
        (None, None) => return Err(CliError::Usage("oracle needs --graph or --config".into())),
    };
    writeln!(
        err,
        "best classical {:.6} vs honest {:.6} (gap {:.6}); witness {:#x}",
        report.classical, report.honest, report.gap, report.witness_bits
    )?;
    write_record(out, &Record::Oracle(report))?;
    Ok(EXIT_ACCEPT)
}

fn test_oracle(g: &crate::graph::Graph) -> Result<OracleReport, ProtocolError> {
    let settings = crate::protocol::build_settings(g)?;
    let (classical, witness) = optimal_classical_acceptance(g, &settings)?;
    let honest = crate::protocol::honest_test_acceptance(g)?;
    Ok(oracle_report(g.n(), settings.len(), None, None, classical, honest, witness))
}

fn oracle_report(
    n: usize,
    settings: usize,
    q: Option<f64>,
    pattern: Option<&str>,
    classical: f64,
    honest: f64,
    witness: ClassicalAssignment,
) -> OracleReport {
    OracleReport {
        n,
        settings,
        q,
        pattern: pattern.map(str::to_string),
        classical,
        honest,
        gap: honest - classical,
        witness_bits: witness.to_bits(),
        witness,
    }
}

/// Runs a sweep and writes its records in grid order.
pub fn sweep(
    config: &SweepConfig,
    protocol: &Protocol,
    adversary: Option<&ProverStrategy>,
    out: &mut dyn Write,
) -> Result<(), ProtocolError> {
    let g = protocol.graph();
    let io_err = |e: io::Error| ProtocolError::Config(format!("write failed: {e}"));
    let mut cell = 0u64;
    let mut next_seed = || {
        let s = trial_seed(config.seed, cell);
        cell += 1;
        s
    };
    for &q in &config.q {
        for &eps in &config.eps {
            for &theta in &config.theta {
                let base = if theta == 0.0 {
                    honest_strategy(g)?
                } else {
                    crate::provers::perturbed_strategy(g, theta)?
                };
                let strategy = if eps == 0.0 { base } else { base.with_noise(eps)? };
                let seed = next_seed();
                let records = protocol.run_trials(&strategy, q, seed, config.trials)?;
                let accepted = records.iter().filter(|r| r.accepted).count() as u64;
                let exact = protocol.acceptance(&strategy, q).ok();
                let rec = SweepCell { q, eps, theta, seed, estimate: Estimate::new(accepted, config.trials), exact };
                write_record(out, &Record::SweepCell(rec)).map_err(io_err)?;
            }
        }
        let honest = honest_strategy(g)?;
        let owned;
        let adv = match adversary {
            Some(a) => a,
            None => {
                let (_, witness) = protocol.best_classical(q).map_err(|e| {
                    ProtocolError::Config(format!("no adversary given and {e}"))
                })?;
                owned = crate::provers::classical_strategy(witness);
                &owned
            }
        };
        let estimate = |s: &ProverStrategy, seed: u64| -> Result<Estimate, ProtocolError> {
            let r = protocol.run_trials(s, q, seed, config.trials)?;
            Ok(Estimate::new(r.iter().filter(|t| t.accepted).count() as u64, config.trials))
        };
        let h = estimate(&honest, next_seed())?;
        let a = estimate(adv, next_seed())?;
        let exact_gap = match (protocol.acceptance(&honest, q), protocol.acceptance(adv, q)) {
            (Ok(x), Ok(y)) => Some(x - y),
            _ => None,
        };
        let rec = SweepGap {
            q,
            adversary: adv.kind().clone(),
            gap: h.mean - a.mean,
            honest: h,
            adversarial: a,
            exact_gap,
        };
        write_record(out, &Record::SweepGap(rec)).map_err(io_err)?;
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut loaded = SweepConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        loaded.config.seed = s;
    }
    if let Some(t) = a.trials {
        if t == 0 {
            return Err(CliError::Usage("--trials must be positive".into()));
        }
        loaded.config.trials = t;
    }
    let mut buf = Vec::new();
    sweep(&loaded.config, &loaded.protocol, loaded.adversary.as_ref(), &mut buf)?;
    out.write_all(&buf)?;
    let records = read_records(buf.as_slice())?;
    let mut best: Option<&SweepGap> = None;
    for r in &records {
        if let Record::SweepGap(gap) = r {
            writeln!(
                err,
                "q = {:<6} gap {:+.4} (honest {:.4}, adversary {:.4})",
                gap.q, gap.gap, gap.honest.mean, gap.adversarial.mean
            )?;
            if best.is_none_or(|b| gap.gap > b.gap) {
                best = Some(gap);
            }
        }
    }
    if let Some(b) = best {
        writeln!(err, "largest empirical gap at q = {}", b.q)?;
    }
    Ok(EXIT_ACCEPT)
}
