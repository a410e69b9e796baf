use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdlac_cli::commands::{self, GenKind};
use mdlac_cli::config::{Axis, CriterionChoice};
use mdlac_cli::{CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "mdlac",
    version,
    about = "MDL and a-contrario detection experiments"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; omitted fields keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    criterion: Option<CriterionChoice>,
}

#[derive(Subcommand)]
enum Command {
    /// Single-square detection rates over side and noise level.
    SweepSingle,
    /// Four-square model selection along one axis.
    SweepMulti {
        #[arg(long, value_enum, default_value = "noise")]
        axis: Axis,
    },
    /// Polygon simplification under both criteria.
    Polygon,
    /// Segment detection, boundary table and optional false-alarm count.
    Lsd,
    /// Exhaustive MDL/NFA decision comparison.
    Equiv,
    /// Write a synthetic test image.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        /// Output PGM path.
        path: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Print the effective configuration as JSON.
    Config,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(e) = common.epsilon {
        cfg.epsilon = e;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(c) = common.criterion {
        cfg.criterion = c;
    }
    cfg.epsilon()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = load(&cli.common)?;
    match cli.command {
        Command::SweepSingle => commands::sweep_single(&cfg),
        Command::SweepMulti { axis } => commands::sweep_multi(&cfg, axis),
        Command::Polygon => commands::polygon(&cfg),
        Command::Lsd => commands::lsd(&cfg),
        Command::Equiv => commands::equiv(&cfg),
        Command::Gen { kind, path, delta } => commands::gen(&cfg, kind, delta, &path),
        Command::Config => Ok(serde_json::to_string_pretty(&cfg)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
