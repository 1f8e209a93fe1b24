//! `pwl`: simulations, figure data, sweeps and quantum diagnostics for the
//! two-mode parametric amplifier.
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical or I/O
//! failures. `manifest.json` is written last and only on success.

mod error;
mod figure;
mod output;
mod quantum;
mod simulate;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::simulate::Mode;

#[derive(Debug, Parser)]
#[command(name = "pwl", version, about = "Parametric amplification with sum and difference pumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory.
    #[arg(long, global = true, env = "PWL_OUT_DIR", default_value = "pwl-out")]
    out: PathBuf,
    /// Reserved; every model is deterministic. Recorded in the manifest.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write its time series and gain report.
    Simulate {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
    },
    /// Write the data behind one figure preset (2, 3, 4 or 5).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=5))]
        n: u8,
        /// JSON overrides for the preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads for sweeps; 0 picks the core count.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Evaluate a one- or two-axis parameter sweep.
    Sweep {
        spec: PathBuf,
        /// Worker threads; 0 picks the core count.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Evolve a truncated two-mode state and report Hermiticity diagnostics.
    Quantum {
        config: PathBuf,
        #[arg(long, default_value_t = 8)]
        nmax: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out.as_path();
    match cli.command {
        Command::Simulate { config, mode } => simulate::cmd_simulate(&config, mode, out, cli.seed),
        Command::Figure { n, config, jobs } => figure::cmd_figure(n, config.as_deref(), jobs, out, cli.seed),
        Command::Sweep { spec, jobs } => sweep::cmd_sweep(&spec, jobs, out, cli.seed),
        Command::Quantum { config, nmax } => quantum::cmd_quantum(&config, nmax, out, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pwl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
