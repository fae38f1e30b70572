//! The `ratmin` command line: `fit`, `sweep` and `verify`.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 iteration limit reached,
//! 3 degenerate run. `verify` exits 0 iff no check fails.

mod record;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::basis::BasisKind;
use crate::diagnostics::{self, IterPairContext};
use crate::dual_core::WeightVector;
use crate::lawson::{self, InitKind, RunStatus, SolverConfig};
use crate::problem::{self, BuiltinProblem, DegreePair, SampleFormat, SampleSet};
use crate::{Error, Result};

pub use record::{DiagnosticsSummary, OutputRecord, ProblemDescriptor, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Slack in the lower-bound replay.
pub const LOWER_BOUND_SLACK: f64 = 1e-10;
/// Slack in the weak-duality check.
pub const WEAK_DUALITY_SLACK: f64 = 1e-10;
/// Relative tolerance when comparing recorded and recomputed `d2`.
pub const REPLAY_TOL: f64 = 1e-8;
/// Slackness tolerance relative to `max(1, d2)`.
pub const SLACKNESS_TOL: f64 = 1e-6;
/// Consecutive `d2` values closer than this count as stagnation.
pub const STAGNATION_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "ratmin", version, about = "Discrete rational minimax approximation by dual Lawson iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver and write a JSON record.
    Fit(FitArgs),
    /// Run the solver for several exponents and emit per-iteration CSV rows.
    Sweep(SweepArgs),
    /// Replay the diagnostics on a saved record.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Sample CSV with columns x_re,x_im,f_re,f_im.
    #[arg(long, value_name = "PATH", conflicts_with = "builtin", required_unless_present = "builtin")]
    input: Option<PathBuf>,
    /// Builtin instance: example1, abs_on_grid, exp_unit_circle, runge_grid.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Number of samples for a builtin (default 4 for example1, 21 otherwise).
    #[arg(long, requires = "builtin")]
    m: Option<usize>,
    /// Numerator degree.
    #[arg(long)]
    n1: usize,
    /// Denominator degree.
    #[arg(long)]
    n2: usize,
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1000)]
    maxit: usize,
    /// Stopping tolerance on the relative duality gap.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Drop weights below this threshold.
    #[arg(long, default_value_t = 0.0)]
    filter_eps: f64,
    /// arnoldi or monomial.
    #[arg(long, default_value = "arnoldi")]
    basis: BasisKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Initial weights: uniform or random.
    #[arg(long, default_value = "uniform")]
    init: InitKind,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// JSON record destination (stdout if absent).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Trace CSV destination.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Store the weight vector of every iterate in the record.
    #[arg(long)]
    snapshot_weights: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Comma-separated exponents.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    beta_list: Vec<f64>,
    /// CSV destination (stdout if absent).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Record written by `fit --snapshot-weights`.
    record: PathBuf,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Verify(args) => cmd_verify(&args),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_USAGE
    })
}

pub fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Converged | RunStatus::InterpolationFound => EXIT_OK,
        RunStatus::MaxIter => EXIT_MAX_ITER,
        RunStatus::Degenerate => EXIT_DEGENERATE,
    }
}

fn load_problem(args: &ProblemArgs) -> Result<(String, SampleSet, DegreePair)> {
    let degrees = DegreePair::new(args.n1, args.n2);
    let (source, samples) = match (&args.input, &args.builtin) {
        (Some(path), _) => (path.display().to_string(), problem::load_samples(path, SampleFormat::Csv)?),
        (None, Some(name)) => {
            let kind: BuiltinProblem = name.parse()?;
            let m = args.m.unwrap_or(match kind {
                BuiltinProblem::Example1 => 4,
                _ => 21,
            });
            (format!("builtin:{}", kind.name()), problem::builtin_problem(kind, m)?)
        }
        (None, None) => return Err(Error::InvalidInput("one of --input or --builtin is required".into())),
    };
    degrees.check_against(samples.len())?;
    Ok((source, samples, degrees))
}

fn solver_config(args: &SolverArgs, beta: f64, record_weights: bool) -> SolverConfig {
    SolverConfig {
        beta,
        max_iter: args.maxit,
        eps_r: args.tol,
        eps_w: args.filter_eps,
        basis_kind: args.basis,
        record_weights,
        seed: args.seed,
        init: args.init,
        ..SolverConfig::default()
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn cmd_fit(args: &FitArgs) -> Result<i32> {
    let (source, samples, degrees) = load_problem(&args.problem)?;
    let config = solver_config(&args.solver, args.beta, args.snapshot_weights);
    let run = lawson::run_d_lawson(&samples, degrees, &config, None)?;
    let rec = OutputRecord::from_run(ProblemDescriptor::new(source, &samples, degrees), &config, &run);
    let mut json = rec.to_json();
    json.push('\n');
    write_output(args.out.as_deref(), &json)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, run.trace.to_csv()).map_err(|e| Error::io(path, e))?;
    }
    if let Some(msg) = &run.failure {
        eprintln!("warning: run ended early: {msg}");
    }
    Ok(exit_code(run.status))
}

/// Header of the sweep CSV.
pub const SWEEP_HEADER: &str = "beta,k,d2,e_xi,eps,chi,nu";

fn cmd_sweep(args: &SweepArgs) -> Result<i32> {
    if args.beta_list.is_empty() {
        return Err(Error::InvalidInput("--beta-list is empty".into()));
    }
    let (_, samples, degrees) = load_problem(&args.problem)?;
    let runs: Vec<Result<(f64, String, RunStatus)>> = args
        .beta_list
        .par_iter()
        .map(|&beta| {
            let config = solver_config(&args.solver, beta, true);
            let run = lawson::run_d_lawson(&samples, degrees, &config, None)?;
            let mut rows = String::new();
            for row in &run.trace.rows {
                let nu = row
                    .weights
                    .as_ref()
                    .and_then(|w| WeightVector::new(w.clone()).ok())
                    .and_then(|w| {
                        let (sol, _, _) = lawson::evaluate_at(&samples, degrees, &config, &w).ok()?;
                        diagnostics::nu(&sol, &w, beta).ok()
                    });
                let _ = writeln!(
                    rows,
                    "{beta},{},{:.16e},{:.16e},{:.16e},{},{}",
                    row.k,
                    row.d2,
                    row.e_xi,
                    row.eps,
                    row.chi.map_or(String::new(), |c| format!("{c:.16e}")),
                    nu.map_or(String::new(), |v| format!("{v:.16e}")),
                );
            }
            Ok((beta, rows, run.status))
        })
        .collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    runs.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (_, rows, _) in &runs {
        out.push_str(rows);
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(runs.iter().map(|r| exit_code(r.2)).max().unwrap_or(EXIT_OK))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass,
    Fail,
    Skip,
}

impl CheckOutcome {
    fn label(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Skip => "SKIP",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: &'static str,
    pub outcome: CheckOutcome,
    pub detail: String,
}

fn row(name: &'static str, outcome: CheckOutcome, detail: String) -> CheckRow {
    CheckRow { name, outcome, detail }
}

fn pass_fail(ok: bool) -> CheckOutcome {
    if ok {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail
    }
}

/// Runs every replay check on a record.
pub fn verify_record(rec: &OutputRecord) -> Result<Vec<CheckRow>> {
    let samples = rec.problem.samples()?;
    let degrees = rec.problem.degrees();
    let config = &rec.config;
    let mut rows = Vec::new();

    let snapshots: Option<Vec<WeightVector>> = rec
        .trace
        .iter()
        .map(|r| r.weights.clone().map(WeightVector::new))
        .collect::<Option<Vec<_>>>()
        .map(|v| v.into_iter().collect::<Result<Vec<_>>>())
        .transpose()?;

    match snapshots {
        None => {
            rows.push(row("trace_replay", CheckOutcome::Skip, "record has no weight snapshots".into()));
            rows.push(row("lower_bound", CheckOutcome::Skip, "record has no weight snapshots".into()));
        }
        Some(ws) => {
            let sols = ws
                .iter()
                .map(|w| lawson::evaluate_at(&samples, degrees, config, w).map(|(s, _, _)| s))
                .collect::<Result<Vec<_>>>()?;
            let mismatches = rec
                .trace
                .iter()
                .zip(&sols)
                .filter(|(r, s)| (r.d2 - s.d2).abs() > REPLAY_TOL * r.d2.abs().max(1.0))
                .count();
            rows.push(row(
                "trace_replay",
                pass_fail(mismatches == 0),
                format!("{mismatches} of {} recorded d2 values differ from recomputation", sols.len()),
            ));

            let mut pairs = 0;
            let mut violations = 0;
            let mut skipped = 0;
            for k in 0..sols.len().saturating_sub(1) {
                let beta = rec.trace[k].beta;
                let updated = lawson::update_weights(&ws[k], &sols[k].residual_abs, beta);
                let is_update = updated.is_ok_and(|u| {
                    u.as_slice()
                        .iter()
                        .zip(ws[k + 1].as_slice())
                        .all(|(a, b)| (a - b).abs() <= 1e-12)
                });
                if !is_update {
                    skipped += 1;
                    continue;
                }
                let ctx = IterPairContext {
                    values: samples.values(),
                    w_k: &ws[k],
                    sol_k: &sols[k],
                    w_next: &ws[k + 1],
                    sol_next: &sols[k + 1],
                    beta,
                };
                let Ok(bound) = diagnostics::chi_lower_bound(&ctx) else {
                    skipped += 1;
                    continue;
                };
                pairs += 1;
                if !bound.holds(rec.trace[k].d2, rec.trace[k + 1].d2, LOWER_BOUND_SLACK) {
                    violations += 1;
                }
            }
            rows.push(row(
                "lower_bound",
                pass_fail(violations == 0),
                format!("{violations} violations in {pairs} iterate pairs ({skipped} skipped)"),
            ));
        }
    }

    let weak = rec
        .trace
        .iter()
        .filter(|r| r.d2 > r.e_xi * r.e_xi + WEAK_DUALITY_SLACK)
        .count();
    rows.push(row(
        "weak_duality",
        pass_fail(weak == 0),
        format!("{weak} of {} iterates exceed e(xi)^2", rec.trace.len()),
    ));

    let last_two: Vec<f64> = rec.trace.iter().rev().take(2).map(|r| r.d2).collect();
    let stagnated = last_two.len() == 2 && (last_two[0] - last_two[1]).abs() < STAGNATION_TOL;
    let certified = rec.diagnostics.certified_minimax;
    let final_state = if certified || stagnated {
        let w = WeightVector::new(rec.final_weights.clone())?;
        let (sol, _, _) = lawson::evaluate_at(&samples, degrees, config, &w)?;
        Some((w, sol))
    } else {
        None
    };

    match &final_state {
        Some((w, sol)) => {
            let res = diagnostics::slackness_residual(w, &sol.residual_abs, sol.d2.sqrt());
            let tol = SLACKNESS_TOL * sol.d2.max(1.0);
            rows.push(row(
                "slackness",
                pass_fail(res <= tol),
                format!("max |w r (r - sqrt(d2))| = {res:.3e} (tolerance {tol:.1e})"),
            ));
        }
        None => rows.push(row("slackness", CheckOutcome::Skip, "run neither certified nor stagnated".into())),
    }

    match final_state.filter(|_| certified) {
        Some((_, sol)) => {
            let (a, b) = rec.coefficients();
            let e = sol.max_residual();
            let eps = (sol.d2.sqrt() - e).abs() / e;
            let count = diagnostics::reference_point_count(&sol.residual_abs, e, record::reference_band(eps));
            match diagnostics::compute_defect(&a, &b, degrees, record::DEGREE_TOL) {
                Ok(defect) => {
                    let need = (degrees.n1 + degrees.n2 + 2).saturating_sub(defect);
                    rows.push(row(
                        "reference_points",
                        pass_fail(count >= need),
                        format!("{count} reference points, need {need} (defect {defect})"),
                    ));
                }
                Err(e) => rows.push(row("reference_points", CheckOutcome::Fail, e.to_string())),
            }
        }
        None => rows.push(row("reference_points", CheckOutcome::Skip, "run not certified".into())),
    }
    Ok(rows)
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let text = std::fs::read_to_string(&args.record).map_err(|e| Error::io(&args.record, e))?;
    let rec = OutputRecord::from_json(&text)?;
    let rows = verify_record(&rec)?;
    let mut out = String::new();
    for r in &rows {
        let _ = writeln!(out, "{:<18} {}  {}", r.name, r.outcome.label(), r.detail);
    }
    write_output(None, &out)?;
    let failed = rows.iter().any(|r| r.outcome == CheckOutcome::Fail);
    Ok(if failed { EXIT_USAGE } else { EXIT_OK })
}
