//! `volcast` command-line entry point.

mod args;
mod commands;
mod error;
mod output;
mod run;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use run::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let (name, out) = match &cli.command {
        Command::Ingest(a) => ("ingest", &a.data.out),
        Command::Backtest(a) => ("backtest", &a.data.out),
        Command::Select(a) => ("select", &a.data.out),
        Command::Spectral(a) => ("spectral", &a.data.out),
        Command::VwapReport(a) => ("vwap-report", &a.data.out),
        Command::Diagnose(a) => ("diagnose", &a.data.out),
        Command::Replicate(a) => ("replicate", &a.data.out),
    };
    let result = match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Backtest(a) => commands::backtest(a),
        Command::Select(a) => commands::select(a),
        Command::Spectral(a) => commands::spectral(a),
        Command::VwapReport(a) => commands::vwap_report(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Replicate(a) => commands::replicate(a),
    };

    let (code, failures) = match result {
        Ok(f) if f.is_empty() => return ExitCode::SUCCESS,
        Ok(f) => {
            eprintln!("error: {} fold failure(s); see failures.json", f.len());
            (3, f)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            if code != 3 {
                return ExitCode::from(code);
            }
            (code, vec![Failure { stage: name.into(), origin: None, error: e.to_string() }])
        }
    };
    if let Err(e) = commands::write_failures(out, name, &failures) {
        eprintln!("error: could not write failure manifest: {e}");
    }
    ExitCode::from(code)
}
