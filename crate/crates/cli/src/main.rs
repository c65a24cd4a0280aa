//! `floquet`: spectra, propagation and validation runs driven by a JSON
//! experiment config.
//!
//! Exit codes: 0 success, 1 runtime or output error, 2 config error,
//! 3 failed validation check, 4 convergence failure.

mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::SpectrumMode;
use config::{ExperimentConfig, Overrides};
use table::ResultTable;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0} validation check(s) failed")]
    ChecksFailed(usize),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::ChecksFailed(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "floquet", version, about = "Floquet quasi-energies and propagators for periodically driven systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transition amplitudes and populations on the configured time grid.
    Propagate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Quasi-energy spectra.
    Spectrum {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "sft-sweep")]
        mode: SpectrumMode,
        /// Number of phase points for the sweep.
        #[arg(long, default_value_t = 64)]
        sweep_points: usize,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Runs the invariant checks; exits with code 3 if any fails.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    cfg.apply(overrides);
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, table: &ResultTable) -> Result<(), CliError> {
    match &cfg.outputs.path {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            table.write(cfg.outputs.format, &mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            table.write(cfg.outputs.format, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Propagate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            emit(&cfg, &commands::propagate(&cfg)?)
        }
        Command::Spectrum { config, mode, sweep_points, overrides } => {
            let cfg = load(&config, &overrides)?;
            emit(&cfg, &commands::spectrum(&cfg, mode, sweep_points)?)
        }
        Command::Validate { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let (table, failures) = commands::validate(&cfg)?;
            emit(&cfg, &table)?;
            if failures > 0 {
                return Err(CliError::ChecksFailed(failures));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("floquet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
