use std::process::ExitCode;

use clap::Parser;
use cornrate::cli::{error_json, run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(json) => {
            print!("{json}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
