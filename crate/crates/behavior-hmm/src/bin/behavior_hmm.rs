//! Thin command-line front end over the library's harness functions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use behavior_hmm::harness::{
    cmd_eval, cmd_recognize, cmd_simulate, cmd_train, ExperimentConfig, HarnessError,
    RecognizeInput,
};
use behavior_hmm::hmm::TrainConfig;
use behavior_hmm::perception::{NoiseParams, QuantizerConfig};

#[derive(Parser)]
#[command(name = "behavior-hmm", about = "Model, train, and recognize agent behaviors online")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate randomized runs of one behavior into run directories.
    Simulate {
        #[arg(long)]
        behavior: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a behavior model from simulated runs and write its model file.
    Train {
        #[arg(long)]
        behavior: String,
        /// Directory containing run directories (each with measurements.csv).
        #[arg(long)]
        runs: PathBuf,
        /// Hidden state count; 0 uses the behavior's nominal event count.
        #[arg(long, default_value_t = 0)]
        states: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run online recognition over an event or position stream.
    Recognize {
        /// Directory of behavior model files (or a single file).
        #[arg(long)]
        models: PathBuf,
        /// JSON Lines event stream: {"t": seconds, "sym": int} per line.
        #[arg(long, conflicts_with = "positions")]
        events: Option<PathBuf>,
        /// CSV position stream with header t,x,y; perception runs first.
        #[arg(long)]
        positions: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce the evaluation: fresh runs per behavior, eval.csv, summary.json.
    Eval {
        /// JSON experiment config file.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { behavior, count, seed, out } => {
            if count == 0 {
                return Err(HarnessError::Validation("--count must be >= 1".into()));
            }
            let dirs = cmd_simulate(&behavior, count, seed, &out)?;
            println!("wrote {} runs of {behavior} under {}", dirs.len(), out.display());
            Ok(())
        }
        Command::Train { behavior, runs, states, out } => {
            let report = cmd_train(
                &behavior,
                &runs,
                states,
                &out,
                &QuantizerConfig::default(),
                &NoiseParams::default(),
                &TrainConfig::default(),
            )?;
            println!(
                "trained {behavior} on {} sequences; log-likelihood trace:",
                report.sequences
            );
            for (i, ll) in report.log_likelihood_trace.iter().enumerate() {
                println!("  iter {i:3}: {ll:.6}");
            }
            for warning in &report.warnings {
                eprintln!("warning: {warning}");
            }
            println!("model written to {}", out.display());
            Ok(())
        }
        Command::Recognize { models, events, positions, out } => {
            let input = match (&events, &positions) {
                (Some(path), None) => RecognizeInput::Events(path),
                (None, Some(path)) => RecognizeInput::Positions(path),
                _ => {
                    return Err(HarnessError::Validation(
                        "provide exactly one of --events or --positions".into(),
                    ))
                }
            };
            let n = cmd_recognize(
                &models,
                input,
                &out,
                &QuantizerConfig::default(),
                &NoiseParams::default(),
            )?;
            println!("wrote {n} reports to {}", out.display());
            Ok(())
        }
        Command::Eval { config } => {
            let config = ExperimentConfig::load(&config)?;
            let summary = cmd_eval(&config)?;
            println!(
                "evaluated {} behaviors x {} runs; locked by 40%: {:.1}%",
                summary.per_behavior.len(),
                summary.runs_per_behavior,
                summary.overall_fraction_locked_by_40_percent * 100.0
            );
            println!(
                "results: {} and {}",
                config.output_dir.join("eval.csv").display(),
                config.output_dir.join("summary.json").display()
            );
            Ok(())
        }
    }
}
