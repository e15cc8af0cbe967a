use std::path::PathBuf;
use std::process::ExitCode;

use bisim_ot::harness::{Command, ExperimentConfig, Overrides};
use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Solve,
    Oracle,
    ModelSelect,
    EncDec,
    DistMatrix,
    Sweep,
}

/// Optimal transport distances between Markov chains.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// TOML experiment file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Solver seed; grid commands use consecutive seeds from here.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Discount factor in (0, 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Iteration count K.
    #[arg(long)]
    iters: Option<usize>,
    /// enc-dec, similarity, model-select or trajectory.
    #[arg(long)]
    preset: Option<String>,
    /// `oracle.csv` written by the oracle command.
    #[arg(long)]
    compare_oracle: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Solve => Command::Solve,
        Sub::Oracle => Command::Oracle,
        Sub::ModelSelect => Command::ModelSelect,
        Sub::EncDec => Command::EncDec,
        Sub::DistMatrix => Command::DistMatrix,
        Sub::Sweep => Command::Sweep,
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        gamma: cli.gamma,
        iterations: cli.iters,
        preset: cli.preset,
        compare_oracle: cli.compare_oracle,
    };
    let result = match &cli.config {
        Some(path) => ExperimentConfig::load(path),
        None => ExperimentConfig::from_toml_str(""),
    }
    .and_then(|cfg| command.run(&cfg, &overrides));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
