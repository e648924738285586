//! `hssr`: batch front end for the heralded-superradiance models.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::OutDir;

/// Caps the worker-thread count.
const THREADS_ENV: &str = "HSSR_THREADS";

#[derive(Parser)]
#[command(
    name = "hssr",
    version,
    about = "Biphoton waveform, sweep, fit and Monte Carlo runs for a dense vapor cell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// P1(τ) at one temperature: waveform.csv and waveform.json.
    Waveform(Common),
    /// Forward model over the configured temperatures: sweep.csv.
    Sweep(Common),
    /// Fit μ from (temperature_C, fwhm_ns) or (N, strength) rows: fit_mu.json.
    FitMu(Common),
    /// Seeded event streams, histogram and CAR / pair-rate estimates.
    Mc(Common),
    /// Optical depth and r_SR/λ against the reference table: table1.csv.
    Table1(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Cell temperature, °C.
    #[arg(long, allow_negative_numbers = true)]
    temp: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Input CSV for fit-mu.
    #[arg(long)]
    data: Option<PathBuf>,
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("{THREADS_ENV}: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let (common, f): (_, fn(&Context) -> CliResult<()>) = match &cli.command {
        Command::Waveform(c) => (c, commands::waveform),
        Command::Sweep(c) => (c, commands::sweep),
        Command::FitMu(c) => (c, commands::fit_mu_cmd),
        Command::Mc(c) => (c, commands::mc),
        Command::Table1(c) => (c, commands::table1),
    };
    let config = RunConfig::load(common.config.as_deref())?;
    let out = OutDir::create(&common.out)?;
    let echo = toml::to_string(&config.raw).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    out.write_str("run_config.toml", &echo)?;
    let ctx = Context {
        config: &config,
        out,
        temperature_c: common.temp,
        seed: common.seed,
        data: common.data.as_deref(),
    };
    f(&ctx)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
