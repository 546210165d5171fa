use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let args = kdl_cli::Args::parse();
    match kdl_cli::run(&args) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
