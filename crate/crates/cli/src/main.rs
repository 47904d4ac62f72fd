mod args;
mod commands;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    commands::configure_threads()?;
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Marginal(a) => commands::marginal(a),
        Command::Convergence(a) => commands::convergence(a),
        Command::Gibbs(a) => commands::gibbs(a),
        Command::Cv(a) => commands::cv(a),
        Command::Maptau(a) => commands::maptau(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bayonet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
