mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use featprop::error::Error;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Embed(a) => commands::embed(&cli, a),
        Command::Generate(a) => commands::generate(&cli, a),
        Command::Train(a) => commands::train(&cli, a),
        Command::Eval(a) => commands::eval(&cli, a),
        Command::Overflow(a) => commands::overflow(&cli, a),
        Command::Zachary(a) => commands::zachary(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 malformed input, 3 infeasible weights, 4 overflow, 5 no convergence.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. } | Error::Json(_) | Error::Csv(_) | Error::NodeOutOfRange { .. }) => 2,
        Some(Error::Infeasible(_)) => 3,
        Some(Error::OverflowDetected { .. } | Error::TrainingOverflow { .. }) => 4,
        Some(Error::NotConverged { .. }) => 5,
        _ => 1,
    }
}
