use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "rwvd", version, about = "Random walks in varying dimension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Criterion series and recurrence verdict for a schedule.
    Classify(ClassifyArgs),
    /// phi or phi1 over a range of n, as CSV.
    Phi(PhiArgs),
    /// Monte Carlo replicas of a walk in varying dimension.
    Simulate(SimulateArgs),
    /// Probability of visiting the origin during [a, b).
    Hitting(HittingArgs),
    /// Exact hitting probabilities against the reference shapes.
    Bands(BandsArgs),
    /// Return-probability exponent from exact programmes.
    Lclt(LcltArgs),
    /// Build a schedule level by level from planar return estimates.
    Adaptive(AdaptiveArgs),
    /// The two series for the alternating walk.
    Prop61(Prop61Args),
    /// The min-term series of a block-length sequence.
    Lemma46(Lemma46Args),
    /// Run every section of a TOML file as a command.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Phi(_) => "phi",
            Command::Simulate(_) => "simulate",
            Command::Hitting(_) => "hitting",
            Command::Bands(_) => "bands",
            Command::Lclt(_) => "lclt",
            Command::Adaptive(_) => "adaptive",
            Command::Prop61(_) => "prop61",
            Command::Lemma46(_) => "lemma46",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Args, Default)]
pub struct OutputArgs {
    /// Write here (atomically) instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Record wall time in the envelope.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    DoubleexpSqrt,
    DoubleexpTheta,
    SingleExp,
    ExpPolylog,
    Geometric,
    PowerLaw,
    Explicit,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub power: Option<f64>,
    /// Schedule values, one integer per line (explicit family).
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkArg {
    Z2z3,
    Z2z4,
    Z1z3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimWalkArg {
    Z2z3,
    Z2z4,
    Z1z3,
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawArg {
    /// Fair ±1 marginals.
    Simple,
    /// ±1 with probability 1/4 each, hold 1/2.
    Lazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiKindArg {
    Phi,
    Phi1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[arg(long, value_enum)]
    pub walk: WalkArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub nmax: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PhiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[arg(long, value_enum, default_value = "phi")]
    pub kind: PhiKindArg,
    #[arg(long)]
    pub n_from: u64,
    #[arg(long)]
    pub n_to: u64,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub walk: SimWalkArg,
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Diagonal block lengths (alternating walk).
    #[arg(long)]
    pub a_seq: Option<String>,
    /// Horizontal block lengths (alternating walk).
    #[arg(long)]
    pub b_seq: Option<String>,
    #[arg(long)]
    pub horizon: u64,
    #[arg(long, default_value_t = 1000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "lazy")]
    pub law: LawArg,
    /// CSV of return events (replica, k, interval_index).
    #[arg(long)]
    #[serde(skip)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct HittingArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub a: u64,
    #[arg(long)]
    pub b: u64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact programme instead of Monte Carlo.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value = "simple")]
    pub law: LawArg,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BandsArgs {
    #[arg(long)]
    pub dim: usize,
    /// `a_1,a_2,...;f_1,f_2,...` giving cells `(a, a + round(f a))`.
    #[arg(long)]
    pub grid: String,
    #[arg(long, value_enum, default_value = "lazy")]
    pub law: LawArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LcltArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub kmin: u64,
    #[arg(long)]
    pub kmax: u64,
    #[arg(long, value_enum, default_value = "lazy")]
    pub law: LawArg,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AdaptiveArgs {
    #[arg(long)]
    pub levels: usize,
    #[arg(long, default_value_t = 0.5)]
    pub target: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest trial horizon.
    #[arg(long, default_value_t = 1 << 16)]
    pub cap: u64,
    #[arg(long, value_enum, default_value = "lazy")]
    pub law: LawArg,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Prop61Args {
    #[arg(long, allow_hyphen_values = true)]
    pub a_seq: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b_seq: String,
    #[arg(long)]
    pub nmax: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Lemma46Args {
    #[arg(long, allow_hyphen_values = true)]
    pub b_seq: String,
    #[arg(long)]
    pub nmax: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for entry outputs; defaults to the config's directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
}
