use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shqmm_cli::commands;
use shqmm_cli::{CliError, ExperimentConfig, Result};

#[derive(Parser, Debug)]
#[command(name = "shqmm", version, about = "Split hidden quantum Markov models: data, training, evaluation")]
struct Cli {
    /// Overrides the seed of the relevant config section.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a dataset from the configured generator and split it.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train the configured model; writes checkpoint.json and metrics.csv.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Split directory or single dataset file; generated if omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Score a checkpoint; writes report.csv and summary.csv.
    Evaluate {
        checkpoint: PathBuf,
        /// Dataset file, or a split directory (its test.txt is used).
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Train configs (.toml) or load checkpoints (.json) and compare test DA.
    Compare {
        #[arg(required = true)]
        entries: Vec<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Training runs per config, seeded consecutively.
        #[arg(long, default_value_t = 1)]
        repeats: usize,
    },
    /// Stiefel distance between the Kraus points of two checkpoints.
    Distance { first: PathBuf, second: PathBuf },
}

fn config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate { config: path } => {
            let mut cfg = config(path.as_deref())?;
            if let Some(s) = cli.seed {
                cfg.data.seed = s;
            }
            commands::generate(&cfg, &cli.out)
        }
        Command::Train { config: path, dataset } => {
            let mut cfg = config(path.as_deref())?;
            if let Some(s) = cli.seed {
                cfg.train.seed = s;
            }
            cfg.validate()?;
            commands::train_cmd(&cfg, dataset.as_deref(), &cli.out)
        }
        Command::Evaluate { checkpoint, dataset } => commands::evaluate_cmd(&checkpoint, &dataset, &cli.out),
        Command::Compare {
            entries,
            dataset,
            repeats,
        } => commands::compare_cmd(&entries, dataset.as_deref(), repeats, cli.seed, &cli.out),
        Command::Distance { first, second } => commands::distance(&first, &second).map(|d| d.to_string()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            println!("{}", msg.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = CliError::exit_code(&e);
            ExitCode::from(code as u8)
        }
    }
}
