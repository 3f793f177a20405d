//! Command-line front end for `pl-core`.
//!
//! `pl <command> [--config FILE] [--fixture paper] [--out DIR] [--seed N] [--parallel N]`
//!
//! Diagnostics go to standard error as one JSON object per line. Exit
//! statuses: 0 success, 2 configuration or validation error, 3 fit
//! non-convergence, 4 I/O error.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::Parser;
use pl_core::fixtures::FixtureSet;
use serde_json::json;

pub use commands::Command;
use config::RunConfig;
use error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK};

/// Environment variable naming a directory with the three table CSVs.
pub const FIXTURE_DIR_ENV: &str = "PL_FIXTURE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FixtureName {
    Paper,
}

#[derive(Debug, Parser)]
#[command(name = "pl", version, about = "Cavity-QED spectra, Purcell brightening, dynamics and photon budgets")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Load the bundled tables and measurements.
    #[arg(long, value_enum)]
    pub fixture: Option<FixtureName>,
    /// Output directory (overrides io.output_dir).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for stochastic steps (overrides the config seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for independent evaluations.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
}

fn load_fixture(fixture_dir: Option<&Path>) -> CliResult<FixtureSet> {
    match fixture_dir {
        Some(dir) => Ok(FixtureSet::load_dir(dir)?),
        None => Ok(FixtureSet::bundled()),
    }
}

/// Runs one command; returns the names of the files written.
pub fn execute(args: &Args, fixture_dir: Option<&Path>) -> CliResult<Vec<String>> {
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            let base = path.parent().unwrap_or(Path::new("."));
            RunConfig::parse(&text, base).map_err(|e| e.in_file(path))?
        }
        None => RunConfig::default(),
    };
    cfg.check_files()?;
    let fixture = args.fixture.map(|_| load_fixture(fixture_dir)).transpose()?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.io.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let seed = args.seed.unwrap_or(cfg.seed);
    let mut ctx = commands::Ctx::new(cfg, fixture, out, seed, args.parallel)?;
    let result = commands::run(args.command, &mut ctx);
    let written = ctx.written().to_vec();
    result.map(|_| written)
}

/// Parses `argv`, runs, prints diagnostics and returns the exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", json!({"level": "error", "kind": "config", "exit_code": EXIT_CONFIG, "message": first}));
            return EXIT_CONFIG;
        }
    };
    let dir = std::env::var_os(FIXTURE_DIR_ENV).map(PathBuf::from);
    match execute(&args, dir.as_deref()) {
        Ok(files) => {
            eprintln!("{}", json!({"level": "info", "command": args.command.as_str(), "written": files}));
            EXIT_OK
        }
        Err(e) => {
            eprintln!(
                "{}",
                json!({
                    "level": "error",
                    "command": args.command.as_str(),
                    "kind": e.kind.as_str(),
                    "exit_code": e.kind.exit_code(),
                    "message": e.message,
                })
            );
            e.kind.exit_code()
        }
    }
}
