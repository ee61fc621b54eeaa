//! `dpsr`: bounds, exact audits, sampling, group-testing simulation and
//! parameter sweeps. Run `dpsr --help` for examples.

mod args;
mod commands;
mod config;
mod error;
mod output;
mod ratio;
mod subject;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::Layer;
use error::{usage, CliResult};
use output::{emit, Format};

fn run(cli: Cli) -> CliResult<()> {
    let section = match &cli.command {
        Command::Bounds(_) => "bounds",
        Command::Audit(_) => "audit",
        Command::Sample(_) => "sample",
        Command::Gt(_) => "gt",
        Command::Sweep(_) => "sweep",
    };
    let (layer, file_format) = Layer::load(cli.config.as_deref(), section)?;
    let format = match (cli.format, file_format) {
        (Some(f), _) => f,
        (None, Some(v)) => {
            serde_json::from_value(v).map_err(|e| usage(format!("config format: {e}")))?
        }
        (None, None) => Format::Table,
    };
    let rendered = match &cli.command {
        Command::Bounds(a) => commands::bounds(layer, a)?,
        Command::Audit(a) => commands::audit(layer, a)?,
        Command::Sample(a) => commands::sample(layer, a)?,
        Command::Gt(a) => commands::gt(layer, a)?,
        Command::Sweep(a) => commands::sweep(layer, a)?,
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    emit(&rendered, format, &mut out)?;
    out.flush()
        .map_err(|e| error::CliError::io("writing to stdout", e))?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dpsr: {e}");
            e.exit_code()
        }
    }
}
