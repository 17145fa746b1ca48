//! `reluinit` command-line interface.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use reluinit_lab::commands::{run_table, validate};
use reluinit_lab::config::Config;
use reluinit_lab::LabResult;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    StatesSweep,
    KnotDensity,
    NormConc,
    #[value(name = "train-1d")]
    Train1d,
    RandomFunctions,
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::StatesSweep => "states-sweep",
            Self::KnotDensity => "knot-density",
            Self::NormConc => "norm-conc",
            Self::Train1d => "train-1d",
            Self::RandomFunctions => "random-functions",
            Self::Validate => "validate",
        }
    }
}

/// Experiments on ReLU network initialization.
#[derive(Debug, Parser)]
#[command(name = "reluinit", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines, optional `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn write_output(out: Option<&PathBuf>, text: &str) -> LabResult<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> LabResult<bool> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed.to_string());
    }
    cfg.apply_overrides(&cli.set)?;
    match cli.command {
        Command::Validate => {
            let report = validate::run(&cfg)?;
            write_output(cli.out.as_ref(), &report.render())?;
            Ok(report.all_passed())
        }
        other => {
            let table = run_table(other.name(), &cfg)?;
            write_output(cli.out.as_ref(), &table.render())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
