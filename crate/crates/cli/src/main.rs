//! surge-al: experiment runner for active-learning surrogate models of pump
//! surge distance. Subcommands: `generate`, `run`, `evaluate`, `compare`.
//!
//! Exit codes: 0 success, 2 usage or validation failure (nothing was
//! trained), 1 runtime failure.

mod checkpoint;
mod commands;
mod config;
mod curve;
mod manifest;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Environment variable consulted for the default output directory.
pub const OUT_DIR_ENV: &str = "SURGE_AL_OUT_DIR";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or invalid configuration; exits with code 2 before any work.
    Usage(String),
    /// Failure while executing a validated command; exits with code 1.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => f.write_str(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl fmt::Display) -> CliError {
    CliError::Usage(msg.to_string())
}

pub fn runtime(msg: impl fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

const AFTER_HELP: &str = "Environment:\n  SURGE_AL_OUT_DIR  default output directory when neither --out-dir nor the\n                    config file provides one (fallback: ./surge-al-out)";

#[derive(Parser)]
#[command(
    name = "surge-al",
    version,
    about = "Active-learning surrogate experiments for pump surge-distance regression",
    after_help = AFTER_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic operating-point dataset as CSV
    Generate(GenerateArgs),
    /// Run campaigns for each configured (strategy, seed) pair
    Run(RunArgs),
    /// Evaluate a saved checkpoint on a CSV dataset
    Evaluate(EvaluateArgs),
    /// Aggregate learning curves per group and compare them budget by budget
    Compare(CompareArgs),
}

#[derive(Args)]
pub struct SharedArgs {
    /// Experiment config file (TOML); command-line flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (default: config out_dir, then $SURGE_AL_OUT_DIR)
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Number of samples to generate
    #[arg(long, value_name = "COUNT")]
    pub n: Option<usize>,
    /// Generator seed
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Output CSV path (default: <out-dir>/data.csv)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Multiplicative measurement-noise level on delta_p and power
    #[arg(long, value_name = "SCALE")]
    pub noise_scale: Option<f64>,
    /// Use a flat noise level instead of scaling it up towards the surge line
    #[arg(long)]
    pub homoscedastic: bool,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Single campaign seed (shorthand for --seeds with one value)
    #[arg(long, value_name = "SEED", conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated campaign seeds, one campaign per seed
    #[arg(long, value_name = "SEEDS", value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    /// Comma-separated strategies: top_variance, random
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub strategies: Option<Vec<String>>,
    /// Use an existing dataset CSV instead of generating one
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Checkpoint JSON produced by `run`
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    /// Dataset CSV to evaluate on
    #[arg(long, value_name = "FILE")]
    pub data: PathBuf,
    /// Report JSON path (default: <out-dir>/evaluation.json)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Acceptance threshold in percent
    #[arg(long, value_name = "PCT", default_value_t = 4.0)]
    pub threshold_pct: f64,
    /// Denominator floor for percentage errors
    #[arg(long, value_name = "PCT", default_value_t = 1.0)]
    pub mape_floor: f64,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub shared: SharedArgs,
    /// Curve files of the candidate group (aggregated as "al")
    #[arg(long = "al", value_name = "FILE", num_args = 1.., required = true)]
    pub al: Vec<PathBuf>,
    /// Curve files of the baseline group
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    pub baseline: Vec<PathBuf>,
    /// Comparison CSV path (default: <out-dir>/comparison.csv)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Run(args) => commands::run(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Compare(args) => commands::compare(args),
    };
    match result {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
    }
}
