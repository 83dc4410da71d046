use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

mod bootstrap;
mod config;
mod io;
mod re;
mod stability;
mod transform;

#[derive(Debug, Parser)]
#[command(
    name = "udstab",
    version,
    about = "Edge stability, UD transformations and pattern-based relation extraction"
)]
struct Cli {
    /// TOML file with default option values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify target edges by stability and score parses per category.
    Stability(stability::StabilityArgs),
    /// Apply a relabeling transformation to a treebank.
    Transform(transform::TransformArgs),
    /// Pattern-based relation extraction.
    #[command(subcommand)]
    Re(re::ReCommand),
    /// Paired bootstrap test between two parsers on the same gold treebank.
    Bootstrap(bootstrap::BootstrapArgs),
}

/// Parse the command line, first appending options taken from `--config`.
fn parse_args(mut argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let command = Cli::command();
    if let Some(path) = config::config_path(&argv) {
        let extra = config::file_args(&command, &path, &argv).map_err(|e| {
            Cli::command().error(
                clap::error::ErrorKind::Io,
                format!("config file {}: {e:#}", path.display()),
            )
        })?;
        argv.extend(extra);
    }
    let mut matches = command.try_get_matches_from(argv)?;
    Cli::from_arg_matches_mut(&mut matches)
}

fn main() -> ExitCode {
    let cli = match parse_args(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Stability(args) => stability::run(&args),
        Command::Transform(args) => transform::run(&args),
        Command::Re(cmd) => re::run(&cmd),
        Command::Bootstrap(args) => bootstrap::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
