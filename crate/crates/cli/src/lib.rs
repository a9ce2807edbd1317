//! Command-line front end of `normsol-core`: configuration, dispatch and
//! artifact persistence.

pub mod commands;
pub mod config;
pub mod error;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{AxisArg, BranchArg, Context, Outcome};
use config::{Origin, RawConfig, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "normsol",
    version,
    about = "Normalized solutions of the mixed-dispersion fourth-order NLS"
)]
pub struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for multi-start and validation sampling, overriding `solver.seed` and `gn.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for solves and sweeps, overriding `sweep.workers`.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponents, thresholds, landscape roots, rescaling constants and multiplier bounds.
    Constants,
    /// Solve one branch and persist the report and profile.
    Solve {
        #[arg(long, value_enum)]
        branch: Branch,
    },
    /// Sweep `mu` or `a` and write a table with plot data.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Search the Bessel test-function bound on the local minimum level.
    Witness,
    /// Estimate and validate the Gagliardo-Nirenberg constant.
    Gn,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Branch {
    Ground,
    Mp,
    Limit,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    Mu,
    A,
}

impl Command {
    fn label(&self) -> String {
        match self {
            Command::Constants => "constants".into(),
            Command::Solve { branch } => {
                format!("solve --branch {}", format!("{branch:?}").to_lowercase())
            }
            Command::Sweep { axis, values } => format!(
                "sweep --axis {} --values {}",
                format!("{axis:?}").to_lowercase(),
                values
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Command::Witness => "witness".into(),
            Command::Gn => "gn".into(),
        }
    }
}

/// Layers environment, file and flags into a validated config.
pub fn load_config(
    cli: &Cli,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<RunConfig, CliError> {
    let mut raw = RawConfig::default();
    raw.merge_env(env)?;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        raw.overlay(RawConfig::parse_text(&text, &path.display().to_string())?);
    }
    if let Some(out) = &cli.out {
        raw.set(
            "output.dir",
            &out.display().to_string(),
            Origin::Flag("out"),
        )?;
    }
    if let Some(seed) = cli.seed {
        raw.set("solver.seed", &seed.to_string(), Origin::Flag("seed"))?;
        raw.set("gn.seed", &seed.to_string(), Origin::Flag("seed"))?;
    }
    if let Some(w) = cli.workers {
        raw.set("sweep.workers", &w.to_string(), Origin::Flag("workers"))?;
    }
    RunConfig::from_raw(&raw)
}

/// Runs a parsed command line.
pub fn run(
    cli: &Cli,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<Outcome, CliError> {
    let config = load_config(cli, env)?;
    if config.workers > 0 {
        // A second call in the same process keeps the first pool, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global();
    }
    let ctx = Context {
        config,
        command: cli.command.label(),
    };
    match &cli.command {
        Command::Constants => commands::constants(&ctx),
        Command::Solve { branch } => commands::solve(
            &ctx,
            match branch {
                Branch::Ground => BranchArg::Ground,
                Branch::Mp => BranchArg::Mp,
                Branch::Limit => BranchArg::Limit,
            },
        ),
        Command::Sweep { axis, values } => commands::sweep(
            &ctx,
            match axis {
                Axis::Mu => AxisArg::Mu,
                Axis::A => AxisArg::A,
            },
            values,
        ),
        Command::Witness => commands::witness(&ctx),
        Command::Gn => commands::gn(&ctx),
    }
}
