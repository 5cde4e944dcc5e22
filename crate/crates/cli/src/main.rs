//! `eadf`: simulate chamber measurements, characterize arrays with
//! conventional or enhanced EADFs, and evaluate the models.
//!
//! Set `EADF_THREADS` to bound the worker pool.

mod cmd;
mod config;
mod pipeline;
mod steps;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "eadf", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a chamber measurement into a pattern container.
    Simulate(cmd::simulate::Args),
    /// Build a conventional or enhanced array model from a container.
    Characterize(cmd::characterize::Args),
    /// Score models against ground-truth patterns.
    Evaluate(cmd::evaluate::Args),
    /// Nyquist angle steps implied by phase-center offsets.
    Budget(cmd::budget::Args),
    /// Check a container, model or scenario file.
    Validate(cmd::validate::Args),
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("EADF_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .with_context(|| format!("EADF_THREADS={value:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the worker pool")
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Characterize(a) => cmd::characterize::run(a),
        Command::Evaluate(a) => cmd::evaluate::run(a),
        Command::Budget(a) => cmd::budget::run(a),
        Command::Validate(a) => cmd::validate::run(a),
    }
}
