use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bellqi::report::{self, Command, Format, Outcome, RunConfig};
use bellqi::Error;
use clap::{Args, Parser, Subcommand};

/// Finite-dimension performance of Bell-state quantum illumination.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Penalty versus dimensionality (or signal brightness) curves.
    Penalty(Common),
    /// Dimensionalities needed for the tabulated penalty targets.
    Table1(Common),
    /// Error-probability bounds versus transmitted photon number.
    PeCurves(Common),
    /// Dimensionality ratio of the two systems versus error probability.
    DimRatio(Common),
    /// Oracle, bound-dominance and Monte Carlo checks.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_NO_ROOT: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        Error::NoRoot(_) => EXIT_NO_ROOT,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = &common.format {
        config.format = f.parse::<Format>()?;
    }
    if common.out.is_some() {
        config.out = common.out.clone();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(threads) = common.threads {
        config.threads = threads;
    }
    if let Some(tol) = common.rel_tol {
        config.rel_tol = tol;
    }
    Ok(config)
}

fn execute(command: Command, common: &Common) -> Result<Outcome, Error> {
    let config = load(common)?;
    let report = report::run(command, &config)?;
    let text = report.render(&config);
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(report.outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match &cli.command {
        Cmd::Penalty(c) => (Command::Penalty, c),
        Cmd::Table1(c) => (Command::Table1, c),
        Cmd::PeCurves(c) => (Command::PeCurves, c),
        Cmd::DimRatio(c) => (Command::DimRatio, c),
        Cmd::Validate(c) => (Command::Validate, c),
    };
    match execute(command, common) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => {
            eprintln!("bellqi: validation failed");
            ExitCode::from(EXIT_VALIDATION)
        }
        Ok(Outcome::NoRoot) => {
            eprintln!("bellqi: solver found no root for at least one row");
            ExitCode::from(EXIT_NO_ROOT)
        }
        Err(e) => {
            eprintln!("bellqi: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
