use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qnet_harness::{load_config, run_experiment, RunOptions, Scenario};

#[derive(Parser)]
#[command(
    name = "qnet",
    version,
    about = "Discrete-event simulator for classical networks with quantum services"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write metrics.csv and trace hashes.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write one full event trace per run under <out>/traces.
        #[arg(long)]
        trace: bool,
        /// Run cells sequentially instead of on the thread pool.
        #[arg(long)]
        serial: bool,
    },
    /// Check a config and report every problem found.
    Validate { config: PathBuf },
    /// List the built-in scenario names.
    ListScenarios,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<20} {}", s.name(), s.summary());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => {
            match load_config(&config).and_then(|c| c.validate().map(|_| c)) {
                Ok(c) => {
                    println!(
                        "{}: ok ({} scenario, {} runs)",
                        config.display(),
                        c.scenario,
                        c.seeds.len() * c.tuples().len()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    ExitCode::from(2)
                }
            }
        }
        Command::Run {
            config,
            out,
            trace,
            serial,
        } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                keep_trace: trace,
                parallel: !serial,
            };
            let result = match run_experiment(&cfg, opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{}: {e}", config.display());
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = result.write_to_dir(&out, trace) {
                eprintln!("{}: {e}", out.display());
                return ExitCode::from(3);
            }
            let aborted = result.aborted();
            for c in &aborted {
                eprintln!(
                    "aborted: seed={} params={} : {}",
                    c.seed,
                    c.params,
                    c.run.error.as_deref().unwrap_or("")
                );
            }
            println!(
                "{} runs, {} rows -> {}",
                result.cells.len(),
                result.records().len(),
                out.display()
            );
            if aborted.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
