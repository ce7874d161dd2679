//! `cancelput` command-line front end.
//!
//! Results go to stdout as JSON; errors too, as `{"error": <kind>, "message": ...}`.
//! Exit codes: 0 ok, 1 failed validation, 2 bad input, 3 IO.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn run(cli: &Cli) -> CliResult<commands::Outcome> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input("threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("cannot start thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Price { model } => commands::price(model),
        Command::Threshold { model } => commands::threshold(model),
        Command::Curve {
            model,
            smin,
            smax,
            points,
            out,
        } => commands::curve(model, *smin, *smax, *points, out),
        Command::Validate { model, mc, suite } => commands::validate(model, mc, *suite),
        Command::Simulate {
            model,
            mc,
            threshold,
            trace,
        } => commands::simulate(model, mc, *threshold, trace.as_deref()),
    }
}

fn print_json(v: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    );
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            print_json(&json!({
                "error": "InvalidArguments",
                "message": e.render().to_string().trim_end(),
            }));
            return ExitCode::from(2);
        }
    };

    match run(&cli) {
        Ok(outcome) => {
            print_json(&outcome.json);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            print_json(&e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
