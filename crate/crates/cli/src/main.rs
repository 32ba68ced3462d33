//! `cidra`: realise reduced-order cell models, simulate drive cycles and
//! time the pipeline.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RealiseFlags;

#[derive(Debug, Parser)]
#[command(name = "cidra", version, about = "Reduced-order lithium-ion cell models")]
struct Cli {
    /// Worker threads for parallel stages; benchmarks always use one
    #[arg(long, global = true, env = "CIDRA_THREADS")]
    threads: Option<usize>,
    /// Seed for any randomised input
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// More log output; repeat for debug
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Realise state-space models over the soc/temperature grid
    Realise(RealiseArgs),
    /// Simulate a drive cycle against a realised model grid
    Simulate(SimulateArgs),
    /// Time the truncated SVD over Hankel sizes
    Bench(BenchArgs),
    /// One-at-a-time timing sweep of the realisation settings
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Args)]
pub struct RealiseArgs {
    /// Cell parameter file; the bundled example cell if omitted
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub flags: RealiseFlags,
    /// Output directory for model files and the manifest
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Directory of realised models
    #[arg(long)]
    pub models: PathBuf,
    /// Drive cycle CSV; the bundled synthetic cycle if omitted
    #[arg(long)]
    pub cycle: Option<PathBuf>,
    #[arg(long, default_value_t = 0.75)]
    pub soc_init: f64,
    /// Cell temperature, K; the parameter file's reference if omitted
    #[arg(long)]
    pub temp: Option<f64>,
    #[arg(long, default_value_t = 2.5)]
    pub v_min: f64,
    #[arg(long, default_value_t = 4.2)]
    pub v_max: f64,
    /// Cells in series, for power cycles
    #[arg(long, default_value_t = 96)]
    pub series: u32,
    /// Cells in parallel, for power cycles
    #[arg(long, default_value_t = 47)]
    pub parallel: u32,
    #[arg(long, default_value_t = 0.827)]
    pub motor_efficiency: f64,
    /// Output directory for the trace and the manifest
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Comma-separated square Hankel sizes
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
    pub sizes: Vec<usize>,
    /// Comma-separated strategies: iterative, dense
    #[arg(long, value_delimiter = ',', default_value = "iterative,dense")]
    pub strategies: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, default_value_t = 1)]
    pub outputs: usize,
    #[arg(long, default_value_t = 6)]
    pub reps: usize,
    /// csv or text
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub flags: RealiseFlags,
    /// Setpoint soc for every case
    #[arg(long = "at-soc", default_value_t = 0.75)]
    pub at_soc: f64,
    /// Setpoint temperature, K
    #[arg(long = "at-temp", default_value_t = 298.15)]
    pub at_temp: f64,
    #[arg(long, default_value_t = 6)]
    pub reps: usize,
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub out: PathBuf,
}

/// A message and the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<cidra_core::Error> for CliError {
    fn from(e: cidra_core::Error) -> Self {
        let code = match &e {
            cidra_core::Error::OutOfHull { .. } => 4,
            e if e.is_validation() => 2,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    let bench = matches!(cli.command, Command::Bench(_) | Command::Sensitivity(_));
    let threads = if bench { Some(1) } else { cli.threads };
    if let Some(n) = threads {
        cidra_core::exec::set_threads(n);
    }
    let ctx = commands::Context {
        threads,
        seed: cli.seed,
    };
    let result = match &cli.command {
        Command::Realise(a) => commands::realise(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Bench(a) => commands::bench(&ctx, a),
        Command::Sensitivity(a) => commands::sensitivity(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
