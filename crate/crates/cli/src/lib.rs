//! Scenario runner for levitated-nanoparticle entanglement landscapes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod config;
pub mod output;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::ScenarioConfig;
use crate::scenario::ScenarioId;

#[derive(Parser, Debug)]
#[command(name = "levarray", version)]
#[command(about = "Steady-state entanglement of levitated nanoparticle arrays")]
pub struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand, Debug)]
enum Commands {
    /// Run a scenario preset and write its CSV artifacts
    Run(RunArgs),
    /// List the scenario presets
    ListScenarios,
    /// Run the invariant suite
    Check(CheckArgs),
}

#[derive(clap::Args, Debug)]
pub struct RunArgs {
    /// Scenario id (see `list-scenarios`)
    pub scenario: ScenarioId,
    /// Config file of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Check every located maximum against the coupling lattice
    #[arg(long)]
    pub oracle: bool,
    /// Override a config key, e.g. `--set params.nbar=0`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(clap::Args, Debug)]
pub struct CheckArgs {
    /// Random systems per check
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(long, default_value_t = 0x1e7a)]
    pub seed: u64,
}

/// Resolves preset, file, flags and `--set` overrides, in that order.
pub fn resolve(args: &RunArgs) -> Result<ScenarioConfig, config::ConfigError> {
    let mut c = args.scenario.preset();
    if let Some(path) = &args.config {
        c.apply_file(path)?;
    }
    if let Some(n) = args.workers {
        c.apply_flag(&format!("run.workers={n}"))?;
    }
    if args.oracle {
        c.oracle = true;
    }
    for flag in &args.overrides {
        c.apply_flag(flag)?;
    }
    if let Some(out) = &args.out {
        c.out = Some(out.clone());
    }
    c.validate()?;
    Ok(c)
}

/// Parses the command line and runs it; `Ok(false)` means checks failed.
pub fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Commands::Run(args) => {
            let config = resolve(&args)?;
            let out = run::resolve_out_dir(&config);
            let outcome = run::run_scenario(&config, &out)?;
            for file in &outcome.files {
                println!("{}", file.display());
            }
            Ok(true)
        }
        Commands::ListScenarios => {
            for id in ScenarioId::ALL {
                println!("{:<8} {}", id.name(), id.description());
            }
            Ok(true)
        }
        Commands::Check(args) => check::run(args.cases, args.seed),
    }
}
