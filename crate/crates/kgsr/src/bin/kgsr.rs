//! Command-line harness for the seeded Monte Carlo experiments.
//!
//! Exit codes: 0 on success, 1 on configuration errors, 2 when the
//! property suite reports a failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kgsr::experiments::{self, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "kgsr",
    version,
    about = "Kernel-based graph signal reconstruction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config and write a CSV report.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the config's Monte Carlo trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads for the trial pool (default: KGSR_THREADS env
        /// var, then all cores). Thread count never changes output bytes.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a config without running anything.
    Validate {
        /// Path to the experiment config.
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match ExperimentConfig::from_path(&config) {
            Ok(cfg) => {
                println!("ok: {} experiment, seed {}", cfg.experiment.name(), cfg.seed);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("config error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            config,
            seed,
            out,
            trials,
            threads,
        } => {
            let mut cfg = match ExperimentConfig::from_path(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            if let Err(e) = cfg.validate() {
                eprintln!("config error: {e}");
                return ExitCode::from(1);
            }

            let thread_count = threads.or_else(|| {
                std::env::var("KGSR_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            });
            if let Some(count) = thread_count {
                if count == 0 {
                    eprintln!("config error: thread count must be positive");
                    return ExitCode::from(1);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(count)
                    .build_global()
                {
                    eprintln!("warning: could not configure thread pool: {e}");
                }
            }

            let report = match experiments::run(&cfg) {
                Ok(report) => report,
                Err(e) => {
                    eprintln!("experiment error: {e}");
                    return ExitCode::from(1);
                }
            };
            let csv = report.to_csv();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, csv) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{csv}"),
            }
            if report.property_failures > 0 {
                eprintln!("{} property check(s) failed", report.property_failures);
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
    }
}
