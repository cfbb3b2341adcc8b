//! `wwm`: figures, evolution runs and state validation for the phase-space toolkit.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{
    Fig2Args, ComptonArgs, Context, EvolveArgs, Fig1Args, Fig3Args, HamiltonianArgs, Mode,
    ValidateArgs,
};

#[derive(Parser)]
#[command(name = "wwm", version, about = "Phase-space toolkit for a relativistic scalar particle")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Precedence: flag > config file > default.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Coupling λ (Compton wavelength over oscillator or packet length).
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Number of oscillator levels N.
    #[arg(long = "basis-size", global = true)]
    pub basis_size: Option<usize>,
    /// Phase-space grid "pmin,pmax,qmin,qmax,np,nq".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, json, svg.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Charge-factor weighting.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// ε-factor surfaces for the free particle and the rotator.
    Fig1(Fig1Args),
    /// Rotator Wigner functions: mixture, nonlocal and standard superposition.
    Fig2(Fig2Args),
    /// Free Gaussian packet with and without the ε kernel.
    Fig3(Fig3Args),
    /// Evolve a state file and record a moment trajectory.
    Evolve(EvolveArgs),
    /// Check the invariants of a state file.
    Validate(ValidateArgs),
    /// Rotator Hamiltonian symbol and its star-eigenvalue residuals.
    Hamiltonian(HamiltonianArgs),
    /// Compton times for rest energies given in the config or on the command line.
    Compton(ComptonArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = Context::new(&cli.common)?;
    match cli.command {
        Command::Fig1(a) => commands::fig::fig1(&ctx, &a),
        Command::Fig2(a) => commands::fig::fig2(&ctx, &a),
        Command::Fig3(a) => commands::fig::fig3(&ctx, &a),
        Command::Evolve(a) => commands::run::evolve(&ctx, &a),
        Command::Validate(a) => commands::run::validate(&ctx, &a),
        Command::Hamiltonian(a) => commands::run::hamiltonian(&ctx, &a),
        Command::Compton(a) => commands::run::compton(&ctx, &a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
