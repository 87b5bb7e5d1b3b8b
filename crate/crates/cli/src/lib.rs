//! Config-driven experiments over `momentchain`, writing CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load, Overrides};
pub use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "momentchain", version, about = "Moment-matched Markov chains on nonuniform grids")]
pub struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for simulation; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Check the transition inequalities and print a JSON report.
    Feasibility,
    /// Exact propagation with per-step moments and recurrence residuals.
    Propagate,
    /// Monte Carlo snapshots.
    Simulate,
    /// Heat profiles on a grid embedding the points of interest.
    Heat,
    /// GBM log-return snapshots, summary and price trajectories.
    Gbm,
    /// Wasserstein-1 distance to the analytic law per step.
    Wasserstein,
}

pub struct Outcome {
    pub report: Option<serde_json::Value>,
    pub written: Vec<PathBuf>,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let Some(path) = cli.config.as_deref() else {
        return Err(CliError::Config(vec!["--config: required".into()]));
    };
    let overrides = Overrides { seed: cli.seed, threads: cli.threads };
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let run = match cli.command {
        Command::Feasibility => commands::feasibility(&load(path, overrides)?)?,
        Command::Propagate => commands::propagate(&load(path, overrides)?)?,
        Command::Simulate => commands::simulate_cmd(&load(path, overrides)?)?,
        Command::Heat => commands::heat(&load(path, overrides)?)?,
        Command::Gbm => commands::gbm(&load(path, overrides)?)?,
        Command::Wasserstein => commands::wasserstein(&load(path, overrides)?, base_dir)?,
    };
    let written = run.outputs.commit(&cli.out)?;
    Ok(Outcome { report: run.report, written })
}
