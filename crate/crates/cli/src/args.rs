use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Lewis densities, measure reduction and p-summing experiments on finite
/// L_p spaces.
///
/// Exit status is 0 on success, 2 when inputs fail validation and 3 when an
/// algorithm does not converge or runs out of retries; failures print a JSON
/// error object on stderr. LPREDUCE_THREADS caps the worker threads.
#[derive(Debug, Parser)]
#[command(name = "lpreduce", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Lewis density of a subspace, its blend, and the sup-norm check.
    Lewis(LewisArgs),
    /// Reduce the measure space carrying a subspace to at most --target-m atoms.
    Embed(EmbedArgs),
    /// Saturation curve of k-vector p-summing lower bounds for an operator.
    Psumming(PsummingArgs),
    /// Saturation curve of the identity from the Walsh tail space into L_p.
    Hypercube(HypercubeArgs),
    /// Monte Carlo and covering-number validators.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Exponent; defaults to the input file's "p" where it has one.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LewisArgs {
    /// Subspace JSON: {"weights": [...], "basis": [[...], ...], "p": ...}.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = lpreduce::lewis::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = lpreduce::lewis::DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Random directions for the sup-norm check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(id = "schedule", multiple = false)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub target_m: usize,
    /// Distortion budget: thresholds 1/2 + c·√(n/size) with c chosen so the
    /// planned stage factors multiply to 1 + epsilon (default 0.5).
    #[arg(long, group = "schedule")]
    pub epsilon: Option<f64>,
    /// Thresholds 1/2 + c·√(n/size) for the given c.
    #[arg(long, group = "schedule")]
    pub sqrt_c: Option<f64>,
    /// One threshold for every stage.
    #[arg(long, group = "schedule")]
    pub theta_max: Option<f64>,
    #[arg(long, default_value_t = lpreduce::sparsify::DEFAULT_RETRY_BUDGET)]
    pub retries: usize,
    #[arg(long, default_value_t = lpreduce::sparsify::DEFAULT_PROBES)]
    pub probes: usize,
    #[arg(long, default_value_t = lpreduce::lewis::DEFAULT_TOL)]
    pub tol: f64,
    /// Directions sampled to measure the distortion of the result.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    /// Increasing values of k, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = lpreduce::summing::DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = lpreduce::summing::DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = lpreduce::summing::DEFAULT_EXCHANGE_ROUNDS)]
    pub exchange_rounds: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PsummingArgs {
    /// Operator JSON: {"matrix": [[...]], "target": ..., "domain": ...}.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HypercubeArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[command(flatten)]
    #[serde(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// Expected supremum of the sign process over the unit ball.
    Rademacher,
    /// Covering curve of the unit sphere in the sup metric and its exponent.
    Entropy,
    /// Entropy integral in the process metric against the Gaussian process.
    Dudley,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Rademacher,
    Gaussian,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 64)]
    pub probes: usize,
    #[arg(long, value_enum, default_value_t = Law::Rademacher)]
    pub law: Law,
    /// Unit-sphere sample size for covering curves.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Ratio between consecutive covering radii.
    #[arg(long, default_value_t = 2f64.powf(-0.25))]
    pub ratio: f64,
    /// Last covering count; defaults to an eighth of the sample.
    #[arg(long)]
    pub max_count: Option<usize>,
}
