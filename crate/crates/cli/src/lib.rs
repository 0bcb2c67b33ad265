//! Command-line front end for the range-query simulator.

pub mod config;
pub mod error;

mod commands;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "ldp-range", version, about = "Range queries under local differential privacy")]
pub struct Cli {
    /// File of `key=value` lines supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-length and overall MSE for each method and privacy level.
    Simulate(RunArgs),
    /// Overall MSE across a grid of privacy levels.
    Sweep(RunArgs),
    /// Decile answers and their errors.
    Quantiles(QuantileArgs),
    /// Print the B-adic cover of a range.
    Decompose(DecomposeArgs),
    /// Enumerate a channel and compare its worst likelihood ratio with e^ε.
    PrivacyCheck(PrivacyArgs),
    /// Closed-form error predictors for each range length.
    Predict(PredictArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// Domain size is 2^d-exp.
    #[arg(long)]
    pub d_exp: Option<u32>,
    /// Privacy budgets, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Methods: flat, hh:B, hh_c:B, haar, optionally suffixed by :oue, :olh
    /// or :hrr. A bare `hh` or `hh_c` expands over `--branching`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Branching factors used to expand bare `hh` and `hh_c`.
    #[arg(long, value_delimiter = ',')]
    pub branching: Option<Vec<usize>>,
    /// Population is 2^n-exp users.
    #[arg(long)]
    pub n_exp: Option<u32>,
    /// Cauchy centre as a fraction of the domain.
    #[arg(long)]
    pub center: Option<f64>,
    /// Cauchy scale in items.
    #[arg(long)]
    pub height: Option<f64>,
    /// Spacing between query start points.
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturb every user instead of drawing aggregate counts.
    #[arg(long)]
    pub per_user: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Exit with status 4 if any overall MSE exceeds this value.
    #[arg(long)]
    pub assert_max_mse: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct QuantileArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Cauchy centres to test, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub centers: Option<Vec<f64>>,
    /// Exit with status 4 if any quantile error exceeds this value.
    #[arg(long)]
    pub assert_max_quantile_error: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// First leaf of the range.
    pub a: usize,
    /// Last leaf of the range, inclusive.
    pub b: usize,
    /// Domain size.
    #[arg(long)]
    pub d: Option<usize>,
    /// Branching factor.
    #[arg(long = "b")]
    pub branching: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PrivacyArgs {
    /// rr1, oue, olh, hrr or haar.
    #[arg(long)]
    pub mechanism: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Exit with status 4 when the check fails.
    #[arg(long)]
    pub assert: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub d_exp: Option<u32>,
    #[arg(long = "b")]
    pub branching: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n_exp: Option<u32>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => config::ConfigFile::load(path)?,
        None => config::ConfigFile::default(),
    };
    match &cli.command {
        Command::Simulate(args) => commands::simulate(args, &file, false),
        Command::Sweep(args) => commands::simulate(args, &file, true),
        Command::Quantiles(args) => commands::quantiles(args, &file),
        Command::Decompose(args) => commands::decompose(args, &file),
        Command::PrivacyCheck(args) => commands::privacy_check(args, &file),
        Command::Predict(args) => commands::predict(args, &file),
    }
}
