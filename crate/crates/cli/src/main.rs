use std::process::ExitCode;

use cde_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are invalid input (exit 1), not clap's default 2
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut warn = |msg: &str| eprintln!("warning: {msg}");
    match run(&cli, &mut warn, &mut std::io::stdout().lock()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
