//! Batch front end: `table1`, `sweep`, `fit`, `mc`, `pump`.
//!
//! Exit codes: 0 success, 1 numeric failure (fit did not converge,
//! degenerate data, ...), 2 usage or configuration error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Axis, FitModel};
use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "coldscatter", version, about = "Near-resonance light scattering in dense ultracold atom clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the expansion-sequence sample table as CSV.
    Table1 {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the analytic models across a parameter axis.
    Sweep {
        #[arg(long)]
        axis: Axis,
        /// Also run the Monte Carlo engine at every grid point.
        #[arg(long)]
        mc: bool,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model to a CSV dataset and print the result as JSON.
    Fit {
        #[arg(long)]
        model: FitModel,
        /// Dataset CSV: header row plus 2 columns (x,y) or 3 (x,y,weight).
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the time-resolved Monte Carlo ensemble.
    Mc {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides [mc].seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the optical-pumping transient (or a density sweep of it).
    Pump {
        #[arg(long)]
        axis: Option<Axis>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Table1 { config, out } => {
            let config = ExperimentConfig::load(config.as_deref())?;
            commands::cmd_table1(&config, out.as_deref())
        }
        Command::Sweep { axis, mc, config, out } => {
            let config = ExperimentConfig::load(config.as_deref())?;
            commands::cmd_sweep(&config, axis, mc, out.as_deref())
        }
        Command::Fit { model, data, config, out } => {
            let config = ExperimentConfig::load(config.as_deref())?;
            commands::cmd_fit(&config, model, &data, out.as_deref())
        }
        Command::Mc { config, seed, out } => {
            let config = ExperimentConfig::load(config.as_deref())?;
            commands::cmd_mc(&config, seed, out.as_deref())
        }
        Command::Pump { axis, config, out } => {
            let config = ExperimentConfig::load(config.as_deref())?;
            commands::cmd_pump(&config, axis, out.as_deref())
        }
    }
}

/// Numeric failures (exit 1) are the core errors a correct config can
/// still hit on bad data; everything else is a usage/config error (2).
fn exit_code_for(err: &anyhow::Error) -> u8 {
    use coldscatter_core::Error as CoreError;
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::NonConvergence(_)
                | CoreError::DegenerateFit(_)
                | CoreError::InsufficientData(_)
                | CoreError::NonDecaying
                | CoreError::RootFind(_) => 1,
                CoreError::Domain(_) | CoreError::TimestepTooCoarse { .. } => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
