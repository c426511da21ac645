//! `irl`: runs the reward-learning experiment suites and writes CSV results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reward_learning::experiments::{self, ExperimentConfig, ExperimentId};

#[derive(Debug, Parser)]
#[command(name = "irl", version, about = "Bayesian reward-learning experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write its CSVs.
    Run {
        /// working-example, crossover, simulation-suite or dependence-study
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Exit nonzero if any check fails.
        #[arg(long)]
        assert: bool,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<bool, reward_learning::Error> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({})", config.display(), cfg.experiment);
            Ok(true)
        }
        Command::Run {
            experiment,
            config,
            out,
            workers,
            assert,
        } => {
            let id = ExperimentId::parse(&experiment)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            if cfg.experiment != id {
                eprintln!("note: config names `{}`, running `{id}`", cfg.experiment);
                cfg.experiment = id;
            }
            let out = out.unwrap_or_else(|| cfg.output_dir());
            let report = experiments::run(&cfg, &out, workers)?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(!assert || report.all_passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
