use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "selout", version, about = "Regression inference that accounts for outlier removal")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect outliers, refit, and report naive and selective inference.
    Fit(FitArgs),
    /// Run a mean-shift Monte-Carlo experiment.
    Simulate {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,

    /// Response column; every other column is a covariate.
    #[arg(long)]
    pub response: String,

    /// cooks, dffits or softipod.
    #[arg(long, default_value = "cooks")]
    pub detect: String,

    /// λ for Cook's distance (default 4), the |DFFITS| threshold
    /// (default 2√(p/n)), or the soft-IPOD penalty (required).
    #[arg(long)]
    pub cutoff: Option<f64>,

    /// exact, est, or a known value (`1.5` or `known:1.5`).
    #[arg(long, default_value = "exact")]
    pub sigma: String,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Require selective confidence intervals; needs a σ value or `est`.
    #[arg(long)]
    pub ci: bool,

    /// Fit without an intercept column.
    #[arg(long)]
    pub no_intercept: bool,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    #[arg(long, default_value_t = 11)]
    pub p: usize,

    /// Outlier magnitude.
    #[arg(long, default_value_t = 4.0)]
    pub s: f64,

    #[arg(long, default_value = "cooks")]
    pub detect: String,

    #[arg(long, default_value_t = 4.0)]
    pub cutoff: f64,

    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub noise: f64,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 500)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output prefix; writes `<out>.json` and `<out>.csv`.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Coef,
    Group,
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Coverage of naive and SELECT-EST intervals.
    Coverage(SimArgs),
    /// Rejection rates over a sweep of the first slope.
    Power {
        #[command(flatten)]
        sim: SimArgs,

        /// Null hypothesis: the first slope, or all slopes jointly.
        #[arg(long, value_enum, default_value_t = Target::Coef)]
        target: Target,

        /// Values of β*_1, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        beta1: Vec<f64>,
    },
    /// Conditional uniformity of null p-values by rejection sampling.
    Uniformity {
        #[arg(long, default_value_t = 50)]
        n: usize,

        #[arg(long, default_value_t = 3)]
        p: usize,

        #[arg(long, default_value = "cooks")]
        detect: String,

        #[arg(long, default_value_t = 3.0)]
        cutoff: f64,

        /// Mean shift on the first row.
        #[arg(long, default_value_t = 6.0)]
        shift: f64,

        /// Accepted draws to collect.
        #[arg(long, default_value_t = 2000)]
        reps: usize,

        /// Draws used to pick the conditioning outlier set.
        #[arg(long, default_value_t = 1000)]
        pilot: usize,

        #[arg(long, default_value_t = 1)]
        seed: u64,

        #[arg(long)]
        out: Option<PathBuf>,

        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}
