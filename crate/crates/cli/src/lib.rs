//! Verification suites behind the `definetti` command-line tool.
//!
//! [`execute`] parses an argument vector, runs one suite and renders its
//! report; the binary only forwards the outcome to the process.

pub mod args;
pub mod report;
pub mod suites;

pub use report::{Record, Report};

use args::{
    BoundsArgs, BoundsMode, Builtin, Cli, Command, ConditioningMode, DefinettiKind, Format, FrameworkMode,
    OperatorArgs, SelectionArg,
};
use clap::Parser;
use definetti_core::repetition::{DecayProfile, Selection};
use definetti_core::separability::Certificate;
use definetti_core::{DimCap, HermitianOperator};
use report::parse_decimal;
use std::ffi::OsString;
use suites::repetition::{ExactParam, PrintedBounds};
use suites::separability::{singlet, LabeledOp};
use suites::Context;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or malformed input files.
    Usage(String),
    Core(definetti_core::Error),
}

impl From<definetti_core::Error> for CliError {
    fn from(e: definetti_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(definetti_core::Error::CapExceeded { .. }) => EXIT_CAP,
            CliError::Core(_) => EXIT_FAIL,
        }
    }
}

/// Exit code, rendered output and the report when a suite ran.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<Report>,
}

pub fn execute<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Outcome { code, stdout: text, stderr: String::new(), report: None }
            } else {
                Outcome { code, stdout: String::new(), stderr: text, report: None }
            };
        }
    };
    let ctx = Context { seed: cli.global.seed.unwrap_or(0), cap: DimCap(cli.global.max_dim), tol: cli.global.tol };
    let result = match cli.global.jobs {
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&ctx, &cli.command)),
            Err(e) => Err(CliError::Usage(format!("cannot start {jobs} workers: {e}"))),
        },
        None => dispatch(&ctx, &cli.command),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("{e}\n"), report: None },
    };
    let text = match cli.global.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    let code = if report.pass { EXIT_PASS } else { EXIT_FAIL };
    let summary = format!(
        "{}: {}/{} records pass\n",
        report.suite,
        report.records.iter().filter(|r| r.pass).count(),
        report.records.len()
    );
    match &cli.global.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: summary, report: Some(report) },
            Err(e) => Outcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("cannot write {}: {e}\n", path.display()),
                report: Some(report),
            },
        },
        None => Outcome { code, stdout: text, stderr: summary, report: Some(report) },
    }
}

fn load_operators(ctx: &Context, a: &OperatorArgs) -> Result<Vec<LabeledOp>, CliError> {
    if let Some(path) = &a.op {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let op = HermitianOperator::from_json_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        ctx.cap.check(op.side())?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(vec![LabeledOp { label, op }]);
    }
    Ok(match a.builtin.unwrap_or(Builtin::Singlet) {
        Builtin::Singlet => vec![LabeledOp { label: "singlet".into(), op: singlet() }],
        Builtin::Random => suites::separability::random_ops(ctx.seed, a.instances)?,
        Builtin::RandomGapped => suites::separability::random_gapped_ops(ctx, a.instances, a.min_delta, a.delta_q)?,
    })
}

fn exact_param(name: &str, text: &str) -> Result<ExactParam, CliError> {
    let exact = parse_decimal(text).ok_or_else(|| CliError::Usage(format!("--{name} {text:?} is not a decimal number")))?;
    let value = text.trim().parse::<f64>().map_err(|e| CliError::Usage(format!("--{name} {text:?}: {e}")))?;
    Ok(ExactParam { value, exact })
}

fn bounds(ctx: &Context, a: &BoundsArgs) -> Result<Report, CliError> {
    Ok(match a.mode {
        BoundsMode::Printed => {
            let delta = exact_param("delta", &a.delta)?;
            let r = exact_param("r", &a.r)?;
            let alpha = a.alpha.as_deref().map(|s| exact_param("alpha", s)).transpose()?;
            let b = PrintedBounds { delta: &delta, r: &r, n: a.n, alpha: alpha.as_ref(), d: a.d };
            suites::repetition::printed_bounds(ctx, &b)?
        }
        BoundsMode::Experiment => {
            let ops = load_operators(ctx, &a.operator)?;
            let o = suites::repetition::ExperimentOptions {
                n_max: a.n_max,
                q: a.q,
                threshold: a.threshold,
                restarts: a.restarts,
            };
            suites::repetition::bound_experiment(ctx, &ops, &o)?
        }
        BoundsMode::Recursion => {
            if !(a.c_min > 0.0 && a.c_min <= a.c_max) {
                return Err(CliError::Usage(format!("need 0 < --c-min <= --c-max, got {} and {}", a.c_min, a.c_max)));
            }
            let o = suites::repetition::RecursionOptions {
                sequences: a.sequences,
                c_range: (a.c_min, a.c_max),
                max_n: a.max_len,
                nu: a.nu,
                gamma: a.gamma,
                saturating_n: a.saturating_len,
            };
            suites::repetition::recursion(ctx, &o)?
        }
    })
}

fn dispatch(ctx: &Context, command: &Command) -> Result<Report, CliError> {
    use suites::{definetti, repetition, separability};
    Ok(match command {
        Command::VerifyDefinetti(a) => match a.kind {
            DefinettiKind::Projector => definetti::projector(ctx, a.n, a.d)?,
            DefinettiKind::Pure => definetti::pure(ctx, a.n, a.d, a.seeds, a.mc_samples, a.sigmas)?,
            DefinettiKind::Mixed => definetti::mixed(ctx, a.n, a.d, a.seeds, a.samples)?,
        },
        Command::VerifyPinching(a) => definetti::pinching(ctx, a.instances, a.d_max, a.r_max)?,
        Command::VerifyClassical(a) => definetti::classical(ctx, a.n, a.d)?,
        Command::VerifyTruncated(a) => definetti::truncated(ctx, a.n, a.k, a.d, a.big_d, a.seeds)?,
        Command::Hsep(a) => {
            let ops = load_operators(ctx, &a.operator)?;
            let o = separability::HsepOptions {
                restarts: a.restarts,
                q_max: a.q_max,
                copies: a.copies,
                grid_deg: a.grid_deg,
                cert_out: a.cert_out.clone(),
                fw_cert_out: a.fw_cert_out.clone(),
            };
            separability::hsep(ctx, &ops, &o)?
        }
        Command::Qext(a) => {
            let ops = load_operators(ctx, &a.operator)?;
            separability::qext(ctx, &ops, &a.q, a.restarts)?
        }
        Command::RepetitionBounds(a) => bounds(ctx, a)?,
        Command::ConditioningDemo(a) => match a.mode {
            ConditioningMode::Trajectory => {
                let selections = match a.selection {
                    SelectionArg::Greedy => vec![Selection::GreedyMinMi],
                    SelectionArg::Random => vec![Selection::UniformRandom],
                    SelectionArg::Both => vec![Selection::GreedyMinMi, Selection::UniformRandom],
                };
                repetition::trajectories(ctx, a.n, &a.q, &selections, a.instances)?
            }
            ConditioningMode::PostMeasurement => repetition::post_measurement(ctx, a.instances)?,
            ConditioningMode::CmiChain => repetition::cmi_chain(ctx, a.n, a.k, a.instances)?,
        },
        Command::Framework(a) => match a.mode {
            FrameworkMode::Decay => {
                let profile = match &a.profile {
                    Some(path) => {
                        let text = std::fs::read_to_string(path)
                            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                        let p: DecayProfile = serde_json::from_str(&text)
                            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                        p.validate().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                        p
                    }
                    None => DecayProfile::quarter_square(),
                };
                repetition::decay(ctx, &profile, a.delta, a.r, a.alpha, a.n)?
            }
            FrameworkMode::Fidelity => repetition::fidelity_decay(ctx, a.copies, a.instances)?,
            FrameworkMode::ThresholdTail => repetition::threshold_tail(ctx, a.instances, a.n_max, a.matrix_n_max)?,
            FrameworkMode::Tails => repetition::tails(ctx, a.n_max)?,
        },
        Command::RecheckCertificate(a) => {
            let text =
                std::fs::read_to_string(&a.path).map_err(|e| CliError::Usage(format!("{}: {e}", a.path.display())))?;
            let cert: Certificate = serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("malformed certificate {}: {e}", a.path.display())))?;
            let source = a.path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            separability::recheck_certificate(ctx, &cert, &source).map_err(|e| match e {
                definetti_core::Error::CapExceeded { .. } => CliError::Core(e),
                other => CliError::Usage(format!("malformed certificate {}: {other}", a.path.display())),
            })?
        }
    })
}
