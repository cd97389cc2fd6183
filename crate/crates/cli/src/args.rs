use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Constructs and verifies measure-preserving selections of multivalued
/// interval maps.
#[derive(Debug, Parser)]
#[command(name = "acimsel", version)]
pub struct Cli {
    /// Directory receiving one subdirectory per run.
    #[arg(short, long, global = true, env = "ACIMSEL_OUT", default_value = "acimsel-out")]
    pub out: PathBuf,

    /// Restrict data artifacts to one format; both are written by default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Invariant density of a map, exact for Markov maps, Ulam otherwise.
    Density(DensityArgs),
    /// Build a selection of an envelope preserving a convex combination.
    Select(SelectArgs),
    /// Compare the pushforward of a distribution function with itself.
    Verify(VerifyArgs),
    /// Random maps with position-dependent probabilities.
    Random(RandomArgs),
    /// Exact infeasibility check for the five-branch counterexample.
    CheckCex(CheckCexArgs),
    /// Search two-valued selections preserving a step density.
    TwoValuedSearch(TwoValuedArgs),
    /// Write the dataset behind a figure.
    Reproduce(ReproduceArgs),
    /// Recompute the stated constant-weight invariance and the BGR weights.
    ClaimAudit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityMethod {
    Auto,
    Markov,
    Ulam,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    /// Registered map id or JSON map description file.
    pub map: String,
    #[arg(long, value_enum, default_value_t = DensityMethod::Auto)]
    pub method: DensityMethod,
    /// Bins for Ulam's method.
    #[arg(long, default_value_t = 4096)]
    pub bins: usize,
    /// Cells of the exported CSV samples.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Main,
    Tentlike,
    Conjugacy,
    Slopes,
}

#[derive(Debug, Args, Serialize)]
pub struct SelectArgs {
    /// Envelope id or JSON envelope file.
    pub envelope: String,
    /// Weight of the lower invariant distribution function, `p/q` or decimal.
    #[arg(long, alias = "alpha")]
    pub lambda: String,
    #[arg(long, value_enum, default_value_t = Method::Main)]
    pub method: Method,
    /// Table size of the root-finding branches.
    #[arg(long, default_value_t = acimsel::selection::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Grid for invariance and betweenness checks.
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    /// Cells of the exported graph samples.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Conjugating homeomorphism for `--method conjugacy` (id or JSON file).
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub map: String,
    /// Registered distribution function or density id, or JSON file.
    pub cdf: String,
    #[arg(long, default_value_t = 1 << 14)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RandomArgs {
    #[command(subcommand)]
    pub action: RandomAction,
}

#[derive(Debug, Args, Serialize)]
pub struct RandomSystem {
    /// Comma separated map ids or files.
    #[arg(long, value_delimiter = ',', default_value = "ex2.1/tau1,ex2.1/tau2")]
    pub maps: Vec<String>,
    /// JSON file with piecewise constant probabilities.
    #[arg(long, conflicts_with = "bgr")]
    pub weights: Option<PathBuf>,
    /// Coefficients `a_k` of the target `Σ a_k f_k`; probabilities `a_k f_k / Σ a_j f_j`.
    #[arg(long, value_delimiter = ',')]
    pub bgr: Option<Vec<String>>,
    /// Densities `f_k` for `--bgr`; default: the invariant densities of the maps.
    #[arg(long, value_delimiter = ',')]
    pub densities: Option<Vec<String>>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum RandomAction {
    /// Simulate one orbit.
    Simulate {
        #[command(flatten)]
        system: RandomSystem,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        x0: f64,
        /// Perturbation added after each step; 0 disables it.
        #[arg(long, default_value_t = 1e-12)]
        dither: f64,
        /// Emit a histogram with this many bins instead of the samples.
        #[arg(long)]
        histogram: Option<usize>,
    },
    /// Apply the transfer operator of the random map to a step density.
    Fp {
        #[command(flatten)]
        system: RandomSystem,
        /// Density id or file; default: the `--bgr` target, else Lebesgue.
        #[arg(long)]
        density: Option<String>,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct CheckCexArgs {
    /// Random candidate selections evaluated alongside the exact argument.
    #[arg(long, default_value_t = 100)]
    pub candidates: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct TwoValuedArgs {
    pub envelope: String,
    /// `uniform`, a density id, or JSON density file.
    #[arg(long, default_value = "uniform")]
    pub target: String,
    #[arg(long, default_value_t = acimsel::randmaps::DEFAULT_SEARCH_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ReproduceArgs {
    /// `fig1` … `fig10`, or `all`.
    pub figure: String,
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,
}
