//! `qdiff`: reproducible CSV experiments for the quantum diffusion models.
//!
//! Every subcommand writes `<name>.csv` plus `<name>.manifest` into
//! `--out-dir`. Exit codes: 0 success, 2 usage error, 3 numerical or
//! convergence failure, 4 outside a model's validity domain, 1 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod format;
mod manifest;

use commands::{Fig1Args, Fig2Args, Fig3Args, Fig4Args, FitArgs, PdeCheckArgs, SigmaTArgs, Sink};

#[derive(Debug, Parser)]
#[command(name = "qdiff", version, about = "Quantum and thermo-quantum diffusion experiments")]
struct Cli {
    /// Directory for CSV and manifest files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Flat TOML file of flag defaults (keys use underscores).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free dispersion xi^2(tau) and its rate.
    Fig1(Fig1Args),
    /// Peak spreading rate against initial dispersion.
    Fig2(Fig2Args),
    /// Dispersion in a harmonic trap.
    Fig3(Fig3Args),
    /// Isotope diffusivities against temperature.
    Fig4(Fig4Args),
    /// Overdamped spreading in a cosine potential.
    SigmaT(SigmaTArgs),
    /// Density-equation cross-checks.
    PdeCheck(PdeCheckArgs),
    /// Potential and friction from Arrhenius parameters.
    Fit(FitArgs),
}

/// Bad flags, config keys or parameter combinations.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// A verification run finished outside its tolerance.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    use qdiff_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if cause.is::<CheckFailed>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Domain { .. } => 2,
                E::NotSemiclassical { .. } | E::LogDomain { .. } => 4,
                _ => 3,
            };
        }
    }
    1
}

fn run(cli: &Cli) -> Result<PathBuf> {
    std::fs::create_dir_all(&cli.out_dir)?;
    let config = config::Config::load(cli.config.as_deref())?;
    let sink = Sink {
        out_dir: &cli.out_dir,
        config: &config,
    };
    match &cli.command {
        Command::Fig1(a) => commands::fig1(a, &sink),
        Command::Fig2(a) => commands::fig2(a, &sink),
        Command::Fig3(a) => commands::fig3(a, &sink),
        Command::Fig4(a) => commands::fig4(a, &sink),
        Command::SigmaT(a) => commands::sigma_t(a, &sink),
        Command::PdeCheck(a) => commands::pde_check(a, &sink),
        Command::Fit(a) => commands::fit(a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(path) => {
            eprintln!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
