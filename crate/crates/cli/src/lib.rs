//! `occmob` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a computation fails on valid input,
//! 2 for usage errors and unreadable, malformed or invalid input.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use occmob_core::io::ReportFormat;

/// Master seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Bootstrap replications used when `--replications` is not given.
pub const DEFAULT_REPLICATIONS: u64 = 1000;

#[derive(Debug, Parser)]
#[command(name = "occmob", version, about = "Occupational mobility: observed, structural and true mobility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate P, R, Q, indexes and parameters for each cohort.
    Estimate(EstimateArgs),
    /// Identify the six parameters from a true-mobility matrix.
    Identify(IdentifyArgs),
    /// Simulate a cohort from parameters or primitives.
    Simulate(SimulateArgs),
    /// Bootstrap standard errors for indexes and parameters.
    Bootstrap(BootstrapArgs),
    /// Income premia from an income panel.
    Premia(PremiaArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format: `document` (JSON) or `delimited` (CSV).
    #[arg(long, default_value = "document")]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Micro records CSV: birth_year,father_class,child_class[,weight].
    #[arg(long)]
    pub input: PathBuf,
    /// Cohort definitions CSV: label,birth_from,birth_to. Defaults to 1940–51, 1952–65, 1966–77.
    #[arg(long)]
    pub cohorts: Option<PathBuf>,
    /// Use the `weight` column; otherwise every record counts once.
    #[arg(long)]
    pub weights: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IdentifyArgs {
    /// A 3×3 matrix (CSV rows or JSON array) or an `estimate` report.
    #[arg(long)]
    pub input: PathBuf,
    /// With a report as input, only this cohort.
    #[arg(long)]
    pub cohort: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// TOML configuration with `fathers` and either `[params]` or `[primitives]` + `[supports]`.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `population` from the configuration.
    #[arg(long)]
    pub population: Option<u64>,
    /// Overrides `seed` from the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the simulated counts as weighted micro records.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BootstrapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub cohorts: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS, value_parser = clap::value_parser!(u64).range(1..))]
    pub replications: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub weights: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PremiaArgs {
    /// Income CSV: wave_year,birth_year,occ_class,income.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub cohorts: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

impl From<occmob_core::io::IoError> for CliError {
    fn from(e: occmob_core::io::IoError) -> Self {
        use occmob_core::io::IoError as E;
        match e {
            E::EmptyCohort(_) => CliError::Compute(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<occmob_core::estimation::EstimationError> for CliError {
    fn from(e: occmob_core::estimation::EstimationError) -> Self {
        CliError::Compute(e.to_string())
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// The human-readable summary goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            let _ = if code == 0 { write!(stdout, "{rendered}") } else { write!(stderr, "{rendered}") };
            return code;
        }
    };
    match commands::execute(&cli.command) {
        Ok(out) => {
            let _ = write!(stdout, "{}", out.summary);
            for note in &out.notes {
                let _ = writeln!(stderr, "note: {note}");
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
