//! Command-line front end for the `shearwaves` library: asymptotic
//! expansions of periodic travelling water waves over a flat bed with
//! constant-vorticity shear.
//!
//! Every run is a deterministic function of its configuration: rerunning
//! the same invocation reproduces each artifact byte for byte. Exit
//! codes: 0 success, 2 configuration error, 3 numerical failure (no
//! dispersion root, stagnation, ...), 4 verification failure.

mod commands;
mod config;
mod output;

use std::process;

use clap::{Parser, Subcommand};

/// What went wrong, mapped onto the process exit code.
#[derive(Debug, Clone)]
pub enum CliError {
    /// Invalid configuration or unusable input/output (exit 2).
    Config(String),
    /// A numerical computation failed (exit 3).
    Numerical(String),
    /// A verification check failed (exit 4).
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Verification(m) => m,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "shearwaves",
    version,
    about = "Asymptotic periodic travelling water waves over constant-vorticity shear",
    long_about = "Constructs first-, second-, and third-order asymptotic approximations of \
                  periodic travelling water waves over a flat bed with constant vorticity, \
                  calibrates their amplitude against residual levels, and emits deterministic \
                  data files (surface profiles, streamlines, velocity and pressure fields, \
                  curvature transitions, residual diagnostics, verification reports)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: config::Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dispersion root, flow force, and first-order depth per vorticity
    Dispersion,
    /// Calibrated amplitude and auxiliary parameter per vorticity
    Calibrate,
    /// Surface, streamline, velocity, pressure, and curvature data files
    Fields,
    /// Residual norms and empirical convergence orders
    Residuals,
    /// Run the verification battery and fail on any unmet tolerance
    Verify,
    /// Differences between expansion orders on shared grids
    Compare {
        /// Expansion orders to compare, pairwise in the given sequence
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        orders: Vec<usize>,
    },
    /// Full campaign: dispersion, calibration, fields, and an index
    Sweep,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::resolve(&cli.overrides)?;
    match &cli.command {
        Command::Dispersion => commands::dispersion(&cfg),
        Command::Calibrate => commands::calibrate_amplitudes(&cfg),
        Command::Fields => commands::fields(&cfg),
        Command::Residuals => commands::residuals(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Compare { orders } => commands::compare(&cfg, orders),
        Command::Sweep => commands::sweep(&cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("shearwaves: {}", e.message());
        process::exit(e.exit_code());
    }
}
