//! `studiomap` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod args;
mod commands;
mod render;
mod settings;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use studiomap::{Error, ErrorCategory, Result};

use args::{Cli, Command};
use settings::Settings;

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Usage => 1,
        ErrorCategory::Data => 2,
        ErrorCategory::Numeric => 3,
    }
}

fn run(cli: Cli) -> Result<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    let seed = settings.seed(cli.seed)?;
    let threads = settings.threads(cli.threads)?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Extract(a) => commands::extract(a, &settings, seed),
        Command::Analyze(a) => commands::analyze(a, &settings),
        Command::Som(a) => commands::som(a, &settings, seed),
        Command::Classify(a) => commands::classify(a, &settings, seed),
        Command::Bundle(a) => commands::bundle(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.class());
            ExitCode::from(exit_code(e.category()))
        }
    }
}
