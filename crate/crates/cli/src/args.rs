//! Command-line grammar.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "definetti", version, about = "Verification suites for constrained de Finetti reductions and separability bounds")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Base seed; falls back to DEFINETTI_SEED, then 0.
    #[arg(long, global = true, env = "DEFINETTI_SEED")]
    pub seed: Option<u64>,
    /// Largest operator side any suite may allocate.
    #[arg(long, global = true, default_value_t = 4096)]
    pub max_dim: usize,
    /// Worker threads for independent instances.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Override the suite's main tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symmetric projector, pure and mixed constrained reductions.
    VerifyDefinetti(DefinettiArgs),
    /// Pinching inequality on random operator families.
    VerifyPinching(PinchingArgs),
    /// Pointwise classical reduction over all strings.
    VerifyClassical(ClassicalArgs),
    /// Reduction with a truncated symmetric ambient space.
    VerifyTruncated(TruncatedArgs),
    /// Seesaw value of the separability support function.
    Hsep(HsepArgs),
    /// Extendibility upper bounds on the separability support function.
    Qext(QextArgs),
    /// Printed repetition bounds, bound experiments and the scalar recursion.
    RepetitionBounds(BoundsArgs),
    /// Measurement conditioning: trajectories, entropy bound and CMI chain.
    ConditioningDemo(ConditioningArgs),
    /// Decay rates of the convex-constraint framework.
    Framework(FrameworkArgs),
    /// Re-evaluate a certificate from its raw data.
    RecheckCertificate(RecheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DefinettiKind {
    Projector,
    Pure,
    Mixed,
}

#[derive(Debug, Args)]
pub struct DefinettiArgs {
    #[arg(long, value_enum, default_value_t = DefinettiKind::Pure)]
    pub kind: DefinettiKind,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Number of consecutive seeds starting at the base seed.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    /// Sampled states per seed for the fidelity-domination step.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Monte Carlo samples for cross-checking the moment integral; 0 skips it.
    #[arg(long, default_value_t = 0)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 5.0)]
    pub sigmas: f64,
}

#[derive(Debug, Args)]
pub struct PinchingArgs {
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 4)]
    pub d_max: usize,
    #[arg(long, default_value_t = 4)]
    pub r_max: usize,
}

#[derive(Debug, Args)]
pub struct ClassicalArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct TruncatedArgs {
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Extra copies; 0 compares against the pure reduction.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long = "big-d", default_value_t = 3)]
    pub big_d: usize,
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    Singlet,
    Random,
    /// Scaled random contractions with a certified gap of at least --min-delta.
    RandomGapped,
}

#[derive(Debug, Args)]
pub struct OperatorArgs {
    /// Operator JSON file `{dims, re, im}`.
    #[arg(long, conflicts_with = "builtin")]
    pub op: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    /// Number of random operators.
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, default_value_t = 0.2)]
    pub min_delta: f64,
    /// Extension order used to certify the gap of random-gapped operators.
    #[arg(long, default_value_t = 4)]
    pub delta_q: usize,
}

#[derive(Debug, Args)]
pub struct HsepArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 3)]
    pub q_max: usize,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Angular step in degrees of the product-state grid; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pub grid_deg: f64,
    /// Write the seesaw certificate here.
    #[arg(long)]
    pub cert_out: Option<PathBuf>,
    /// Write a Frank–Wolfe fidelity certificate for the normalized operator here.
    #[arg(long)]
    pub fw_cert_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QextArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub q: Vec<usize>,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoundsMode {
    Printed,
    Experiment,
    Recursion,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = BoundsMode::Printed)]
    pub mode: BoundsMode,
    #[arg(long, default_value = "0.5")]
    pub delta: String,
    #[arg(long, default_value = "1")]
    pub r: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub alpha: Option<String>,
    /// Local dimension for the dimension-dependent bounds.
    #[arg(long)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    #[arg(long, default_value_t = 4)]
    pub q: usize,
    #[arg(long)]
    pub threshold: Option<usize>,
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    #[arg(long, default_value_t = 1000)]
    pub sequences: usize,
    #[arg(long, default_value_t = std::f64::consts::LN_2)]
    pub c_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub c_max: f64,
    #[arg(long, default_value_t = 40)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    #[arg(long, default_value_t = 12)]
    pub saturating_len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConditioningMode {
    Trajectory,
    PostMeasurement,
    CmiChain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectionArg {
    Greedy,
    Random,
    Both,
}

#[derive(Debug, Args)]
pub struct ConditioningArgs {
    #[arg(long, value_enum, default_value_t = ConditioningMode::Trajectory)]
    pub mode: ConditioningMode,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
    pub q: Vec<usize>,
    #[arg(long, value_enum, default_value_t = SelectionArg::Both)]
    pub selection: SelectionArg,
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrameworkMode {
    Decay,
    Fidelity,
    ThresholdTail,
    Tails,
}

#[derive(Debug, Args)]
pub struct FrameworkArgs {
    #[arg(long, value_enum, default_value_t = FrameworkMode::Decay)]
    pub mode: FrameworkMode,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 0.25)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Copies of the state in fidelity mode.
    #[arg(long, default_value_t = 3)]
    pub copies: usize,
    /// Decay profile JSON; defaults to ε²/4.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub instances: usize,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Largest n at which the threshold operator is also built as a matrix.
    #[arg(long, default_value_t = 4)]
    pub matrix_n_max: usize,
}

#[derive(Debug, Args)]
pub struct RecheckArgs {
    pub path: PathBuf,
}
