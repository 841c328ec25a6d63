//! `maxmin` command-line front end.
//!
//! Exit codes: 0 success, 1 property failure, 2 configuration error,
//! 3 computation error.

mod commands;
mod config;
mod expr;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CommonArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "maxmin",
    version,
    about = "Neural network approximation operators: error tables, surfaces, kernels, property checks and rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sup-norm errors of the classical, max-product and max-min operators.
    Compare(CommonArgs),
    /// One operator on a grid, as plot-ready CSV plus a JSON sidecar.
    Surface(CommonArgs),
    /// Samples of phi on an interval and rho on a grid.
    Kernel(CommonArgs),
    /// Seeded numerical property suite.
    Verify(CommonArgs),
    /// Jackson-type bounds against observed errors, with the empirical order.
    Rates {
        #[command(flatten)]
        common: CommonArgs,
        /// Adds this amount to every observed error (exercises violation reporting).
        #[arg(long = "inject-error", hide = true)]
        inject_error: Option<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Compute(String),
    #[error("{0}")]
    PropertyFailure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::PropertyFailure(_) => 1,
            CliError::Config(_) => 2,
            CliError::Compute(_) => 3,
        }
    }
}

impl From<maxmin::Error> for CliError {
    fn from(e: maxmin::Error) -> Self {
        use maxmin::Error as E;
        let message = e.to_string();
        match e {
            E::InvalidParameter(_)
            | E::UnknownActivation(_)
            | E::DimensionMismatch { .. }
            | E::EmptyLattice { .. }
            | E::PointOutsideDomain { .. }
            | E::MomentMayBeInfinite { .. }
            | E::RangeViolation { .. }
            | E::NegativeSample { .. }
            | E::MixedRange { .. }
            | E::NotDefinedEverywhere
            | E::ResolutionTooCoarse { .. } => CliError::Config(message),
            _ => CliError::Compute(message),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, inject) = match &cli.command {
        Command::Compare(c) | Command::Surface(c) | Command::Kernel(c) | Command::Verify(c) => {
            (c, None)
        }
        Command::Rates {
            common,
            inject_error,
        } => (common, *inject_error),
    };
    let config = RunConfig::resolve(common)?;
    let task = || match &cli.command {
        Command::Compare(_) => commands::compare(&config),
        Command::Surface(_) => commands::surface(&config),
        Command::Kernel(_) => commands::kernel(&config),
        Command::Verify(_) => commands::verify(&config),
        Command::Rates { .. } => commands::rates(&config, inject),
    };
    match config.threads {
        None => task(),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Compute(format!("cannot start thread pool: {e}")))?
            .install(task),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
