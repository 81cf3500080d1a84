//! `alpha-lab`: seeded experiments and audits for the tunable α-loss,
//! emitting plot-ready CSV files.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

/// Environment variable capping the number of worker threads.
const THREADS_ENV: &str = "ALPHA_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "alpha-lab", version, about = "Experiments and audits for the tunable alpha-loss")]
struct Cli {
    /// Exit with code 4 when an audit finds violations.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// α-tilted versions of a probability mass function.
    Tilt(commands::tilt::Args),
    /// Empirical α-risk on a square lattice of a two-dimensional model.
    Landscape(commands::landscape::Args),
    /// Averaged predictors under class imbalance or label noise.
    Synth(commands::synth::Args),
    /// Pointwise audit of evolved and bootstrapped certificates.
    SlqcAudit(commands::slqc_audit::Args),
    /// Generalization bounds, optionally with a Monte Carlo audit.
    Bounds(commands::bounds::Args),
    /// Excess 0-1 risk of empirical α-risk minimizers against sample size.
    Trend(commands::trend::Args),
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure {threads} threads: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let strict = cli.strict;
    match cli.command {
        Command::Tilt(args) => commands::tilt::run(args),
        Command::Landscape(args) => commands::landscape::run(args, strict),
        Command::Synth(args) => commands::synth::run(args),
        Command::SlqcAudit(args) => commands::slqc_audit::run(args, strict),
        Command::Bounds(args) => commands::bounds::run(args, strict),
        Command::Trend(args) => commands::trend::run(args, strict),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alpha-lab: {e}");
            e.exit_code()
        }
    }
}
