//! `tauberlab`: build the smoothed growth function, tabulate the oscillating
//! counterexamples, continue their Laplace transforms and run the
//! verification battery.
//!
//! Exit codes: 0 success, 1 a check or evaluation failed, 2 bad configuration.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use crate::commands::Outcome;
use crate::config::{ConfigError, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "tauberlab",
    version,
    about = "Oscillating counterexamples for Tauberian theorems, evaluated numerically"
)]
struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Rate function: log, pow, loglog or table.
    #[arg(long, global = true, value_name = "NAME")]
    rate: Option<String>,

    /// Exponent for the pow rate.
    #[arg(long, global = true, value_name = "F")]
    alpha: Option<f64>,

    /// Two-column CSV (x, rho) for the table rate.
    #[arg(long, global = true, value_name = "PATH")]
    table: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Comma-separated subset of checks for `verify`.
    #[arg(long, global = true, value_name = "CHECK[,CHECK...]")]
    only: Option<String>,

    /// Table grid as A:B:N.
    #[arg(long = "x-range", global = true, value_name = "A:B:N")]
    x_range: Option<String>,

    #[arg(long, short, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tabulate omega, W, W', V and the phase (w_profile.csv).
    Construct,
    /// Tabulate T, S, tau and the deviation D, plus half-knot witnesses.
    Oscillate,
    /// Evaluate F, L{cos} and L{dS} on the s-grid via the deformed contour.
    Continue,
    /// Run the verification battery and write report.json.
    Verify,
}

fn thread_count() -> Result<Option<usize>, ConfigError> {
    match std::env::var("TAUBERLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => {
                Err(ConfigError(format!("TAUBERLAB_THREADS must be a non-negative integer, got '{v}'")))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let flags = Overrides {
        rate: cli.rate.clone(),
        alpha: cli.alpha,
        table: cli.table.clone(),
        out: cli.out.clone(),
        only: cli.only.clone(),
        x_range: cli.x_range.clone(),
    };
    let setup = || -> Result<RunConfig, ConfigError> {
        if let Some(n) = thread_count()? {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| ConfigError(e.to_string()))?;
        }
        RunConfig::load(cli.config.as_deref(), &flags)
    };
    let cfg = match setup() {
        Ok(c) => c,
        Err(e) => {
            error!("configuration error: {e}");
            eprintln!("tauberlab: configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    info!("rate {}, output {}", cfg.rate, cfg.out_dir.display());

    let result = match cli.command {
        Command::Construct => commands::construct(&cfg),
        Command::Oscillate => commands::oscillate(&cfg),
        Command::Continue => commands::continue_(&cfg),
        Command::Verify => commands::verify(&cfg),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("tauberlab: {e}");
            ExitCode::from(1)
        }
    }
}
