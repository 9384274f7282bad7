use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lrrl::bandit::{epoch_schedule, ScheduleMode};
use lrrl::harness::{self, HarnessError};

#[derive(Parser)]
#[command(name = "lrrl", version, about = "Multi-task low-rank linear bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV/JSON results.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long, env = "LRRL_OUTPUT_DIR")]
        output_dir: Option<PathBuf>,
        /// Worker threads for trials (0 = one per core).
        #[arg(long, env = "LRRL_WORKERS", default_value_t = 0)]
        workers: usize,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
    /// Print an epoch grid.
    Schedule {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "doubling")]
        mode: ScheduleMode,
        /// Epoch count for the uniform schedule.
        #[arg(long, default_value_t = 4)]
        epochs: usize,
    },
    /// Parse an MNIST IDX image/label pair and print per-digit counts.
    MnistCheck { images: PathBuf, labels: PathBuf },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            workers,
        } => {
            let cfg = match harness::load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let dir = output_dir.unwrap_or_else(|| cfg.output_dir.clone());
            match harness::run_pipeline(&cfg, &dir, workers) {
                Ok((result, written)) => {
                    for p in &result.points {
                        let (mean, var) = p.final_regret();
                        println!(
                            "{} T={} r={}: cumulative regret {mean:.4} (var {var:.4}, {} trials)",
                            p.algorithm.name(),
                            p.tasks,
                            p.rank,
                            p.trials
                        );
                    }
                    for path in written {
                        println!("wrote {}", path.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(HarnessError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CONFIG)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::Validate { config } => match harness::load_config(&config) {
            Ok(cfg) => {
                println!(
                    "ok: {} sweep point(s) x {} algorithm(s) x {} trials",
                    cfg.sweep_points().len(),
                    cfg.algorithms.len(),
                    cfg.trials
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Schedule { n, mode, epochs } => match epoch_schedule(n, mode, Some(epochs)) {
            Ok(s) => {
                let grid: Vec<String> = s.grid.iter().map(usize::to_string).collect();
                println!("[{}]", grid.join(", "));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::MnistCheck { images, labels } => match harness::mnist_summary(&images, &labels) {
            Ok(summary) => {
                print!("{summary}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
    }
}
