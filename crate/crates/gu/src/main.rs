use std::process::ExitCode;

use clap::Parser;
use gu::cli::{self, exit, Cli};

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let parsed = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::OK });
        }
    };
    match cli::run(parsed, argv) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
