//! `nearcurve` — count rational points near planar curves, compute the
//! explicit constants of the theory, and probe the lattice machinery behind
//! its measure estimates.
//!
//! Every run echoes its fully resolved configuration in the output header
//! (CSV comment lines or the JSON `config` object), and all randomness is
//! seeded, so identical invocations produce byte-identical output bodies.
//!
//! Exit codes: 0 ok, 1 validation, 2 guard (brute-force cap, search width,
//! overflow), 3 internal assertion.

mod args;
mod commands;
mod emit;

use args::{Cli, Command};
use clap::Parser;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Guard(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Guard(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Guard(m) | CliError::Internal(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Count(a) => commands::count(&cli, a),
        Command::Measure(a) => commands::measure(&cli, a),
        Command::Bg(a) => commands::bg(&cli, a),
        Command::Good(a) => commands::good(&cli, a),
        Command::Constants(a) => commands::constants(&cli, a),
        Command::Mollify(a) => commands::mollify(&cli, a),
        Command::Pathological(a) => commands::pathological(&cli, a),
        Command::Attach(a) => commands::attach(&cli, a),
        Command::Verify(a) => commands::verify(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
