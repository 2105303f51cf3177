//! `fliess`: batch front end for trees, dendriform products, iterated
//! integrals, Fliess operators and the Magnus recursion.
//!
//! Exit status is 0 on success, 1 when a computation or validation fails
//! and 2 on a usage error. With `--json`, errors go to stderr as
//! `{"error": {"kind", "message"}}`.

mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;

fn report(json_mode: bool, kind: &str, message: &str) {
    let mut err = std::io::stderr().lock();
    if json_mode {
        let _ = writeln!(err, "{}", json!({"error": {"kind": kind, "message": message}}));
    } else {
        let _ = writeln!(err, "error: {message}");
    }
}

fn main() -> ExitCode {
    // The flag must be honoured even when clap rejects the rest of argv.
    let json_mode = std::env::args().skip(1).any(|a| a == "--json");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if json_mode {
                report(true, "usage", e.to_string().trim_end());
            } else {
                let _ = e.print();
            }
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            if out
                .write_all(outcome.stdout.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            report(cli.json, e.kind(), &e.to_string());
            ExitCode::from(1)
        }
    }
}
