//! Config-driven front end for normal-approximation bound computation:
//! operator identity suites, bound reports, convergence sweeps, and the
//! Bernoulli-runs constant comparison.
//!
//! Exit codes: 0 success / all checks pass; 1 check failure;
//! 2 configuration error; 3 hypothesis violation under `--strict`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cltbound::identities::Mutation;

mod commands;
mod config;
mod report;
mod svg;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(cltbound::Error),
}

impl From<cltbound::Error> for CliError {
    fn from(e: cltbound::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum MutationArg {
    /// Run the suite unmodified.
    #[default]
    None,
    /// Self-test: corrupt the RMS operator's sign; the suite must fail.
    RmsSign,
    /// Self-test: corrupt the Laplacian's sign; the suite must fail.
    LaplacianSign,
}

impl From<MutationArg> for Mutation {
    fn from(m: MutationArg) -> Mutation {
        match m {
            MutationArg::None => Mutation::None,
            MutationArg::RmsSign => Mutation::RmsSignFlip,
            MutationArg::LaplacianSign => Mutation::LaplacianSignFlip,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config evaluation mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// CSV output path (stdout when absent). A .json extension switches
    /// the bound command to JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG plot path (sweep command).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Suppress the timestamp header so identical inputs produce
    /// byte-identical output.
    #[arg(long)]
    pub reproducible: bool,
    /// Turn hypothesis violations into exit code 3.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Parser)]
#[command(
    name = "cltbound",
    version,
    about = "Explicit multivariate normal-approximation bounds for nonlinear statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the operator identity suite over a corpus.
    CheckIdentities {
        #[command(flatten)]
        common: CommonArgs,
        /// Deliberate operator corruption for harness self-tests.
        #[arg(long, value_enum, default_value_t)]
        mutation: MutationArg,
    },
    /// Compute bound reports for a configured statistic and target.
    Bound {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate a bound family over a grid of sizes.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the specialized runs bound against the closed-form
    /// constants for Bernoulli run vectors.
    CompareRuns {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::CheckIdentities { common, mutation } => {
            let cfg = config::load(&common.config)?;
            commands::cmd_check_identities(&cfg, common, (*mutation).into())
        }
        Command::Bound { common } => {
            let cfg = config::load(&common.config)?;
            commands::cmd_bound(&cfg, common)
        }
        Command::Sweep { common } => {
            let cfg = config::load(&common.config)?;
            commands::cmd_sweep(&cfg, common)
        }
        Command::CompareRuns { common } => {
            let cfg = config::load(&common.config)?;
            commands::cmd_compare_runs(&cfg, common)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
