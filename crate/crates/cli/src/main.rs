//! `quasi`: command-line front end for the quasi-periodic operator toolkit.

mod commands;
mod config;
mod output;
mod svg;
mod sweep;

use std::process::ExitCode;

/// Exit code for a run whose pass/fail experiments did not all pass.
pub const EXIT_FAILED: u8 = 1;
/// Exit code for usage errors: bad flags, bad config, invalid inputs.
pub const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match config::parse(argv) {
        Ok(cli) => cli,
        Err(config::ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
        Err(config::ParseFailure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
