//! `qdc` — command-line front end for the authenticated QDC simulator.
//!
//! Exit codes: 0 success/accepted, 1 usage or runtime error, 2 protocol or
//! authentication abort, 3 verification failure.

mod cmd_attack;
mod cmd_auth;
mod cmd_run;
mod cmd_tables;
mod cmd_verify;
mod util;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_ABORT: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qdc",
    version,
    about = "Deterministic simulator for GHZ-based authenticated quantum direct communication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Authenticate the parties, transmit a message, and emit the run
    /// transcript as JSON.
    Run(cmd_run::RunArgs),
    /// Analyze an attack strategy, exactly and by Monte Carlo.
    Attack(cmd_attack::AttackArgs),
    /// Regenerate the decode tables from simulation and diff them against
    /// the built-in ones.
    Tables(cmd_tables::TablesArgs),
    /// Run the built-in equation and identity checks.
    Verify,
    /// Run one authentication session on its own.
    AuthDemo(cmd_auth::AuthDemoArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_ERROR,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run::run(args),
        Command::Attack(args) => cmd_attack::run(args),
        Command::Tables(args) => cmd_tables::run(args),
        Command::Verify => cmd_verify::run(),
        Command::AuthDemo(args) => cmd_auth::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
