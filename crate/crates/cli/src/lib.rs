//! Configuration, orchestration and file output for the `kdl` binary.

pub mod config;
pub mod error;
pub mod execute;

use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, parse_config_str, RunConfig, SCHEMA_VERSION};
pub use error::CliError;
pub use execute::{execute, Outcome, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "kdl", version, about = "Discretized Boltzmann recurrence laboratory")]
pub struct Args {
    /// What to do with the configuration.
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "KDL_WORKERS")]
    pub workers: Option<usize>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ignore unknown config keys instead of rejecting them.
    #[arg(long)]
    pub allow_unknown_keys: bool,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Parse, execute and write outputs; the error is reported by the caller.
pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let config = parse_config(&args.config, args.allow_unknown_keys)?;
    let out = args.out.clone().unwrap_or_else(|| config.output_dir.clone());
    let workers = args.workers.filter(|&n| n > 0).unwrap_or_else(default_workers);
    execute(&config, args.subcommand, workers, &out)
}
