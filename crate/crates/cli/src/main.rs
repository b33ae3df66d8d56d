//! Batch CLI for the fiscal rules engine.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O failure. Output is
//! deterministic: records are processed in input order, municipalities in
//! id order, and identical inputs produce byte-identical JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod ingest;
mod report;

use config::EngineConfig;
use fiscal_core::geo_tax::ProfitModel;
use report::Format;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> CliError {
        CliError::Validation(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> CliError {
        CliError::Io(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RecordKind {
    Persons,
    Enterprises,
    Imports,
    Excise,
    Property,
}

impl RecordKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Persons => "persons",
            RecordKind::Enterprises => "enterprises",
            RecordKind::Imports => "imports",
            RecordKind::Excise => "excise",
            RecordKind::Property => "property",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfitModelArg {
    Classic,
    Estonian,
}

impl From<ProfitModelArg> for ProfitModel {
    fn from(value: ProfitModelArg) -> ProfitModel {
        match value {
            ProfitModelArg::Classic => ProfitModel::Classic,
            ProfitModelArg::Estonian => ProfitModel::Estonian,
        }
    }
}

/// Options shared by every subcommand.
pub struct CommonOpts {
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

#[derive(Parser)]
#[command(
    name = "fiscal",
    about = "Deterministic fiscal rules engine: Georgian tax liabilities, budget allocation, equalization transfers, and policy scenarios",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config with {schedules, excise_rates, land_rates, municipal_rates, transfer_params, scenario}
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,

    /// Write the report to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Abort on the first rejected record (default)
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,

    /// Continue past rejected records and list them in the report
    #[arg(long, global = true)]
    lenient: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute per-record tax liabilities for one record kind
    Compute {
        /// CSV or JSON records file
        #[arg(long)]
        input: PathBuf,
        /// Which record kind the input holds
        #[arg(long, value_enum)]
        kind: RecordKind,
        /// Profit-tax model for standard-regime enterprises
        #[arg(long, value_enum, default_value = "estonian")]
        profit_model: ProfitModelArg,
        /// Divide the distribution base by 0.85 before the 15% rate
        #[arg(long)]
        gross_up: bool,
    },
    /// Compute municipal equalization transfers from a registry
    Transfers {
        /// CSV or JSON municipality registry
        #[arg(long)]
        input: PathBuf,
    },
    /// Allocate a revenue ledger between state and local budgets
    Budget {
        /// CSV or JSON ledger (or compute JSON output)
        #[arg(long)]
        input: PathBuf,
        /// Transfers JSON (output of the transfers command) to consolidate
        #[arg(long)]
        transfers: Option<PathBuf>,
        /// Plan-year tag checked against the transfer allocation
        #[arg(long)]
        plan_year: Option<i32>,
    },
    /// Evaluate a population of incomes under alternative schedules
    Scenario {
        /// CSV or JSON incomes; falls back to scenario.incomes in config
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Sweep the rate grid for the revenue-maximizing tax rate
    Sweep,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = EngineConfig::load(cli.config.as_deref())?;
    let opts = CommonOpts {
        format: cli.format,
        out: cli.out.clone(),
        strict: !cli.lenient,
    };
    match &cli.command {
        Command::Compute { input, kind, profit_model, gross_up } => commands::run_compute(
            input,
            *kind,
            (*profit_model).into(),
            *gross_up,
            &config,
            &opts,
        ),
        Command::Transfers { input } => commands::run_transfers(input, &config, &opts),
        Command::Budget { input, transfers, plan_year } => {
            commands::run_budget(input, transfers.as_ref(), *plan_year, &opts)
        }
        Command::Scenario { input } => commands::run_scenario(input.as_ref(), &config, &opts),
        Command::Sweep => commands::run_sweep(&config, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Validation(_) => ExitCode::from(1),
                CliError::Io(_) => ExitCode::from(2),
            }
        }
    }
}
