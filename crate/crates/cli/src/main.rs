use std::process::ExitCode;

use clap::Parser;
use gcnlab::{configure_threads, run, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| {
        let outcome = run(&cli)?;
        for w in &outcome.report.warnings {
            eprintln!("warning: {w}");
        }
        outcome.report.emit(cli.global.out.as_deref())?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
