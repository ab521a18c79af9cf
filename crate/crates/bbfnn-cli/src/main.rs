//! `bbfnn`: train, check, evaluate, and benchmark Beta basis function
//! networks from the command line.

mod commands;
mod config;
mod model;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// How a command failed, which decides the exit code: bad input or
/// configuration exits 2, anything that went wrong while running exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

#[derive(Parser)]
#[command(name = "bbfnn", version, about = "Beta basis function network trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Split {
    Train,
    Test,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write its report files
    Train {
        /// Experiment config (TOML)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Override the config's RNG seed
        #[arg(long, value_name = "N")]
        seed: Option<u64>,
        /// Override the config's output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Compare analytic kernel partials against finite differences
    Gradcheck {
        /// Number of random (unit, point) cases
        #[arg(long, default_value_t = 200, value_name = "N")]
        samples: usize,
        /// Largest acceptable relative error
        #[arg(long, default_value_t = 1e-4, value_name = "X")]
        tolerance: f64,
        /// RNG seed for the random cases
        #[arg(long, default_value_t = 1, value_name = "N")]
        seed: u64,
    },
    /// Evaluate a saved model on a configured dataset
    Eval {
        /// Saved model (JSON)
        model: PathBuf,
        /// Experiment config supplying the dataset
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Which half of the dataset to evaluate on
        #[arg(long, value_enum, default_value_t = Split::Train)]
        split: Split,
        /// Where to write predictions.csv
        #[arg(long, default_value = ".", value_name = "DIR")]
        out: PathBuf,
    },
    /// Run one experiment per seed and tabulate the results
    Bench {
        /// Experiment config (TOML)
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Comma-separated seeds, one run each
        #[arg(long, required = true, value_delimiter = ',', value_name = "N1,N2,...")]
        seeds: Vec<u64>,
        /// Override the config's output directory
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, seed, out } => commands::train(&config, seed, out),
        Command::Gradcheck {
            samples,
            tolerance,
            seed,
        } => commands::gradcheck(samples, tolerance, seed),
        Command::Eval {
            model,
            config,
            split,
            out,
        } => commands::eval(&model, &config, split, &out),
        Command::Bench { config, seeds, out } => commands::bench(&config, &seeds, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
