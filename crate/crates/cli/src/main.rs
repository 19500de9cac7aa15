//! `bell`: run Bell-test experiments, analyze trial logs, and check behaviors.
//!
//! Exit codes: 0 success (or "local" for check-behavior), 1 nonlocal
//! behavior, 2 configuration or input error, 3 runtime error.

mod commands;
mod overrides;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "bell", version, about = "Bell-test arena: local strategies vs. a freedom-enforcing harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write the trial log, report and CSVs.
    Run(RunArgs),
    /// Recompute the report from a trial log.
    Analyze(AnalyzeArgs),
    /// Screen a behavior file for no-signalling and local-polytope membership.
    CheckBehavior(CheckArgs),
    /// Run the canonical constant / periodic / greedy / quantum comparison.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run config (JSON, or TOML key-value for any other extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// constant | iid-random | periodic | greedy-memory | cheat | quantum
    #[arg(long)]
    pub strategy: Option<String>,
    /// Table for the constant strategy, e.g. +1,+1,+1,+1
    #[arg(long, allow_hyphen_values = true)]
    pub table: Option<String>,
    /// Tables for the periodic strategy: `1,1,1,1;-1,-1,-1,-1` or a JSON array.
    #[arg(long, allow_hyphen_values = true)]
    pub tables: Option<String>,
    /// Sixteen comma-separated weights for iid-random, or `uniform`.
    #[arg(long)]
    pub weights: Option<String>,
    /// Cheat target: quantum-preset | uniform | pr-box | pr-box-aligned | path to a behavior file.
    #[arg(long)]
    pub target: Option<String>,
    /// `preset-chsh` or four angles in degrees `a1,a2,b1,b2`.
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    /// Number of trials.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub setting_seed: Option<u64>,
    #[arg(long)]
    pub strategy_seed: Option<u64>,
    /// sequential | galaxy
    #[arg(long)]
    pub mode: Option<String>,
    /// Output directory (default: bell-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit committed tables from the trial log.
    #[arg(long)]
    pub no_tables: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trial log (JSON Lines).
    pub log: PathBuf,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the martingale trajectory CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Behavior JSON: {"p": {"x,y,a,b": probability, ...}}
    pub behavior: PathBuf,
    /// Per-cell tolerance for no-signalling and membership.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = commands::DEMO_TRIALS)]
    pub n: u64,
    /// Directory for trajectory and summary CSVs (default: demo-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl std::fmt::Display) -> Self {
        Self { code: 2, message: format!("config error: {message}") }
    }

    pub fn input(message: impl std::fmt::Display) -> Self {
        Self { code: 2, message: message.to_string() }
    }

    pub fn runtime(message: impl std::fmt::Display) -> Self {
        Self { code: 3, message: format!("error: {message}") }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::runtime(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::cmd_run(&args),
        Command::Analyze(args) => commands::cmd_analyze(&args),
        Command::CheckBehavior(args) => commands::cmd_check_behavior(&args),
        Command::Demo(args) => commands::cmd_demo(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}
