use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::output::Format;

const EXAMPLES: &str = "\
Examples:
  dpsr bounds --n 6 --d 2 --beta 1
  dpsr audit --mech a1ball --n 6 --d 2 --beta 1
  dpsr audit --mech uniform --transform clamp --n 6 --d 2 --beta 1 --format json
  dpsr audit --gt identity --noise before --n 6 --d 2 --beta 1
  dpsr audit --mech a2 --n 6 --d 2 --beta 1 --mode mc --samples 200000 --seed 7
  dpsr sample --mech a1sphere --n 10 --d 3 --beta 2 --count 5 --seed 1
  dpsr gt --gt bernoulli --tests 8 --p 0.3 --noise before --n 12 --d 2 --beta 1 --trials 100 --seed 3
  dpsr sweep --mech a1ball --n 5..9 --d 2 --beta 1 --seed 0 --out sweep.csv

Exit codes: 0 success, 2 usage error, 3 enumeration cap exceeded.";

#[derive(Parser, Debug)]
#[command(
    name = "dpsr",
    version,
    about = "Exact privacy audits for subset retrieval and noisy group testing"
)]
#[command(after_help = EXAMPLES)]
pub struct Cli {
    /// JSON file with defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output format [default: table]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form lower and achievable privacy bounds.
    #[command(after_help = "Example:\n  dpsr bounds --n 6 --d 2 --beta 1 --eps1 0.05 --eps2 0.1")]
    Bounds(BoundsArgs),
    /// Exact (or Monte-Carlo) worst-case delta of a mechanism or pooled test.
    #[command(
        after_help = "Examples:\n  dpsr audit --mech a1sphere --n 6 --d 2 --beta 1\n  \
                            dpsr audit --gt identity --noise after-iid --q0 1/4 --q1 1/4 --n 5 --d 2 --t 2"
    )]
    Audit(AuditArgs),
    /// Draw outputs of a mechanism.
    #[command(
        after_help = "Example:\n  dpsr sample --mech a2 --n 8 --d 2 --beta 2 --count 10 --seed 4 --input 3,5"
    )]
    Sample(SampleArgs),
    /// Simulate collector and lab rounds, one row per trial.
    #[command(
        after_help = "Example:\n  dpsr gt --gt identity --noise before --n 8 --d 2 --beta 1 --trials 20 --seed 9 --format csv"
    )]
    Gt(GtArgs),
    /// Bounds and exact audits over a parameter grid, written as CSV.
    #[command(
        after_help = "Grids accept a single value, a list (5,7,9) or an inclusive range (5..9).\n\n\
                            Example:\n  dpsr sweep --mech a2 --n 6..12 --d 1..3 --beta 1..2 --seed 0 --out a2.csv"
    )]
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechChoice {
    A1sphere,
    A1ball,
    A2,
    Identity,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformChoice {
    /// Output the input whenever the output is farther than beta.
    Clamp,
    /// Trim or pad the output to exactly d items.
    Resize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignChoice {
    /// One pool per item.
    Identity,
    /// Each item joins each pool independently with probability --p.
    Bernoulli,
    /// Pools read from --design-file.
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseChoice {
    None,
    /// Contaminate a uniform beta-subset before pooling.
    Before,
    /// Overwrite each result independently: 0 w.p. q0, 1 w.p. q1, else keep.
    AfterIid,
    /// Overwrite results as a contaminated beta-subset would.
    AfterInduced,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanChoice {
    /// Symmetric fast path for permutation-invariant subjects, full scan otherwise.
    Auto,
    Full,
    Symmetric,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PointArgs {
    /// Ground set size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Secret subset size.
    #[arg(long)]
    pub d: Option<usize>,
    /// Distortion budget, also the noise size for noise-before.
    #[arg(long)]
    pub beta: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    /// Ground set sizes: 7, 5,7,9 or 5..9
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub d: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
}

/// What is being sampled or audited.
#[derive(Args, Debug, Clone, Default)]
pub struct SubjectArgs {
    #[arg(long, value_enum, conflicts_with = "gt")]
    pub mech: Option<MechChoice>,
    #[arg(long, value_enum, requires = "mech")]
    pub transform: Option<TransformChoice>,
    /// Pooling design; use instead of --mech.
    #[arg(long, value_enum)]
    pub gt: Option<DesignChoice>,
    /// Design JSON: {"n": 4, "pools": [[0, 1], [2, 3]]}
    #[arg(long)]
    pub design_file: Option<PathBuf>,
    /// Number of pools for --gt bernoulli.
    #[arg(long)]
    pub tests: Option<usize>,
    /// Membership probability for --gt bernoulli.
    #[arg(long)]
    pub p: Option<f64>,
    /// Noise model for --gt [default: none]
    #[arg(long, value_enum)]
    pub noise: Option<NoiseChoice>,
    /// Pr[U = 0] for after-iid, as a/b or a decimal.
    #[arg(long)]
    pub q0: Option<String>,
    /// Pr[U = 1] for after-iid.
    #[arg(long)]
    pub q1: Option<String>,
    /// Pr[U = 2] for after-iid [default: 1 - q0 - q1]
    #[arg(long)]
    pub q2: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CapArgs {
    /// Largest number of outcomes enumerated for one input [default: 1000000]
    #[arg(long)]
    pub outcome_cap: Option<u128>,
    /// Largest number of neighbor pairs (or inputs) a full scan visits [default: 10000]
    #[arg(long)]
    pub pair_cap: Option<u128>,
    /// Pair scan strategy [default: auto]
    #[arg(long, value_enum)]
    pub scan: Option<ScanChoice>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PrivacyArgs {
    /// Privacy exponent; the audit multiplier is e^eps2 as a fraction [default: 0]
    #[arg(long, conflicts_with = "t")]
    pub eps2: Option<f64>,
    /// Audit multiplier as an exact fraction, instead of --eps2.
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Accuracy failure probability [default: 0]
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Privacy exponent [default: 0]
    #[arg(long)]
    pub eps2: Option<f64>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub subject: SubjectArgs,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    #[command(flatten)]
    pub caps: CapArgs,
    /// exact enumerates every outcome; mc estimates from samples [default: exact]
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// Draws per input in mc mode [default: 100000]
    #[arg(long)]
    pub samples: Option<u64>,
    /// Required in mc mode and for random designs; picks verification pairs otherwise.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub subject: SubjectArgs,
    /// Number of draws [default: 1]
    #[arg(long)]
    pub count: Option<u64>,
    /// Secret subset as comma-separated indices [default: 0..d-1]
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct GtArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub subject: SubjectArgs,
    /// Number of simulated rounds [default: 1]
    #[arg(long)]
    pub trials: Option<u64>,
    /// Infected set as comma-separated indices [default: 0..d-1]
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write trial rows to this CSV file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub subject: SubjectArgs,
    #[command(flatten)]
    pub caps: CapArgs,
    /// Accuracy failure probability used in the lower bounds [default: 0]
    #[arg(long)]
    pub eps1: Option<f64>,
    #[command(flatten)]
    pub privacy: PrivacyArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Destination CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
