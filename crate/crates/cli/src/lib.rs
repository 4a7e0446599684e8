//! Command-line front end for the Toeplitz covariance testing toolkit.
//!
//! [`run`] parses arguments, merges an optional JSON config file, executes the
//! subcommand and returns the process exit code: 0 on success, 2 for invalid
//! input, 3 when a covariance matrix is not positive definite and 4 for
//! numerical or IO failures.

use std::ffi::OsString;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod error;
pub mod figures;
pub mod output;
pub mod params;
pub mod svg;

pub use error::CliError;
use params::Params;

#[derive(Debug, Parser)]
#[command(
    name = "toeplitz-minimax",
    version,
    about = "Minimax tests of identity covariance against Toeplitz alternatives"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form weight plan for a class and radius.
    Weights(Params),
    /// Minimax separation rate for a class at (n, p).
    Rate(Params),
    /// Positive-definiteness check of a Toeplitz matrix.
    CheckPd(Params),
    /// Null calibration of a test statistic.
    SimulateNull(Params),
    /// Power curve over a family of alternatives.
    Power(Params),
    /// Chi and CM power curves on common datasets.
    Compare(Params),
    /// Reproduce a simulation figure from a seed.
    Figure(Params),
}

fn dispatch(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Weights(p) => commands::weights(p),
        Command::Rate(p) => commands::rate(p),
        Command::CheckPd(p) => commands::check_pd(p),
        Command::SimulateNull(p) => commands::simulate_null(p),
        Command::Power(p) => commands::power(p),
        Command::Compare(p) => commands::compare(p),
        Command::Figure(p) => figures::figure(p),
    }
}

fn resolve(command: Command) -> Result<Command, CliError> {
    let wrap = |p: Params, f: fn(Params) -> Command| p.resolve().map(f);
    match command {
        Command::Weights(p) => wrap(p, Command::Weights),
        Command::Rate(p) => wrap(p, Command::Rate),
        Command::CheckPd(p) => wrap(p, Command::CheckPd),
        Command::SimulateNull(p) => wrap(p, Command::SimulateNull),
        Command::Power(p) => wrap(p, Command::Power),
        Command::Compare(p) => wrap(p, Command::Compare),
        Command::Figure(p) => wrap(p, Command::Figure),
    }
}

fn threads(command: &Command) -> Option<usize> {
    match command {
        Command::Weights(p)
        | Command::Rate(p)
        | Command::CheckPd(p)
        | Command::SimulateNull(p)
        | Command::Power(p)
        | Command::Compare(p)
        | Command::Figure(p) => p.threads,
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    let command = resolve(command)?;
    match threads(&command) {
        Some(0) => Err(CliError::Validation("--threads must be at least 1".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| dispatch(&command)),
        None => dispatch(&command),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
