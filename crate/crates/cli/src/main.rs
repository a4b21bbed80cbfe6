//! `stable-extrap`: fit, extrapolate, verify and reproduce figures from the
//! command line.
//!
//! Exit codes: 0 success, 1 failed verification checks, 2 usage or input
//! errors, 3 solver failures.

mod commands;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "stable-extrap", version, about = "Least-squares fitting and extrapolation from equispaced samples")]
struct Cli {
    /// Worker threads for the data-parallel loops.
    #[arg(long, global = true, env = "STABLE_EXTRAP_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Least-squares fit of degree M to samples in an x,y CSV file.
    Fit(FitArgs),
    /// Evaluate the fit of optimal degree to the right of x = 1, with bounds.
    Extrapolate(ExtrapolateArgs),
    /// Run a verification suite and report every inequality checked.
    Verify(VerifyArgs),
    /// Write the CSV data behind one of the figures.
    Figure(FigureArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BasisArg {
    Cheb,
    Leg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum GramArg {
    Naive,
    Fast,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BoundArg {
    Measured,
    Theorem,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ProblemArgs {
    /// Bernstein parameter of the sampled function.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Perturbation level of the samples.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Bound on |f| inside the Bernstein ellipse.
    #[arg(long = "Q")]
    pub q: Option<f64>,
    /// Expected N; must match the input when given.
    #[arg(long = "N")]
    pub n: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Polynomial degree.
    #[arg(long = "M", conflicts_with = "auto", required_unless_present = "auto")]
    pub m: Option<usize>,
    /// Choose the degree from --rho, --eps and --Q.
    #[arg(long)]
    pub auto: bool,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "cheb")]
    pub basis: BasisArg,
    #[arg(long, value_enum, default_value = "fast")]
    pub gram: GramArg,
}

#[derive(Args, Debug)]
pub struct ExtrapolateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated evaluation points in [1, (rho + 1/rho)/2).
    #[arg(long, value_delimiter = ',', required = true)]
    pub at: Vec<f64>,
    #[arg(long, value_enum, default_value = "cheb")]
    pub basis: BasisArg,
    #[arg(long, value_enum, default_value = "fast")]
    pub gram: GramArg,
    /// Smallest singular value used in the bound: measured or a priori.
    #[arg(long, value_enum, default_value = "measured")]
    pub bound: BoundArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// singular-values, appendix-a, gerschgorin, sandwich or all.
    #[arg(long)]
    pub suite: String,
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub figure: u8,
    /// Directory for the CSV files.
    #[arg(long)]
    pub output: PathBuf,
    /// Seed for the Gaussian noise (figure 4).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Degree (figures 4 and 5) or largest degree (figure 3).
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Base number of samples (figure 4).
    #[arg(long = "N")]
    pub n: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "Q")]
    pub q: Option<f64>,
    /// Noise standard deviation (figure 4).
    #[arg(long)]
    pub s: Option<f64>,
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Extrapolate(a) => commands::extrapolate(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Figure(a) => commands::figure(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("stable-extrap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
