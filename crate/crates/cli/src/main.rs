use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gpflow_cli::{commands, GlobalOptions};

/// Ground states of two-component rotating condensates by the
/// semi-implicit normalized gradient flow.
#[derive(Debug, Parser)]
#[command(name = "gpflow", version)]
struct Cli {
    /// Write CSV output here instead of the config's `output_dir`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Fall back to MINRES when the shifted operator is indefinite.
    #[arg(long, global = true)]
    allow_indefinite: bool,
    /// Seed for the randomized checks of `validate`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one ground state and write energy_series.csv and summary.csv.
    Solve { config: PathBuf },
    /// Run a grid of (k11, tau) cells and write sweep.csv.
    Sweep {
        config: PathBuf,
        /// Comma-separated k11 values; k12 and k22 keep their ratios to k11.
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
        /// Comma-separated time steps.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<f64>,
        /// Cells computed concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Check operator symmetry, the gradient, step invariants and the trap assumption.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = GlobalOptions { output_dir: cli.output_dir, allow_indefinite: cli.allow_indefinite, seed: cli.seed };
    let outcome = match &cli.command {
        Command::Solve { config } => commands::solve(config, &opts),
        Command::Sweep { config, k, tau, jobs } => commands::sweep(config, k, tau, *jobs, &opts),
        Command::Validate { config } => commands::validate(config, &opts),
    };
    match outcome {
        Ok(status) => ExitCode::from(status.exit_code()),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
