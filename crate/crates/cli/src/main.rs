//! `bench` — benchmark harness CLI.
//!
//! Subcommands:
//!   bench run --suite <file> --out <dir> [--workers N] [--mode hier|flat] [--seed S]
//!   bench tune --task <id> --budget B --trials T --seed S --out <csv>
//!   bench print-task <id>

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use hsmpc::TaskId;
use hsmpc_cli::{
    run_benchmark, tune_weights, BenchmarkSuite, ControllerMode, RunOptions, TuneOptions,
};

#[derive(Parser)]
#[command(name = "bench", about = "Seeded benchmark suites for the hsmpc planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark suite and write result tables.
    Run {
        /// Suite file (TOML).
        #[arg(long)]
        suite: PathBuf,
        /// Output directory for results.csv / results.json / logs.
        #[arg(long)]
        out: PathBuf,
        /// Parallel trials (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the controller mode for every entry (hier|flat).
        #[arg(long)]
        mode: Option<ControllerMode>,
        /// Override the base seed for every entry.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random-search weight tuning on one task.
    Tune {
        #[arg(long)]
        task: TaskArg,
        /// Weight vectors to evaluate.
        #[arg(long, default_value_t = 20)]
        budget: usize,
        /// Seeded episodes per candidate.
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output curve CSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Print the resolved cost-term list for a task.
    PrintTask { task: String },
}

/// clap-friendly TaskId wrapper (FromStr with the valid-id list in errors).
#[derive(Clone)]
struct TaskArg(TaskId);

impl std::str::FromStr for TaskArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<TaskId>().map(TaskArg).map_err(|e| e.to_string())
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            suite,
            out,
            workers,
            mode,
            seed,
        } => {
            let suite = BenchmarkSuite::load(&suite)?;
            let opts = RunOptions {
                out_dir: Some(out.clone()),
                workers,
                mode,
                seed,
            };
            let table = run_benchmark(&suite, &opts)?;
            print!("{}", table.to_csv());
            eprintln!("wrote {}", out.join("results.csv").display());
        }
        Command::Tune {
            task,
            budget,
            trials,
            seed,
            out,
            workers,
        } => {
            let opts = TuneOptions {
                task: task.0,
                budget,
                trials,
                seed,
                workers,
                out: Some(out.clone()),
                ..TuneOptions::default()
            };
            let (best, curve) = tune_weights(&opts)?;
            let last = curve.last().expect("budget >= 1");
            println!(
                "best success rate {:.3} after {} evaluations ({:.1}s)",
                last.best_so_far,
                curve.len(),
                last.cumulative_wall_s
            );
            for (name, value) in &best {
                println!("  {name} = {value:.4}");
            }
            eprintln!("wrote {}", out.display());
        }
        Command::PrintTask { task } => {
            let task: TaskId = task.parse()?;
            let cost = hsmpc::assemble_task_cost(task, &hsmpc::CostParams::default());
            println!("{task}: {} terms", cost.terms.len());
            for term in &cost.terms {
                println!("  {:+.4} * {}", term.weight, term.kind);
            }
            if !cost.terminal_terms.is_empty() {
                println!("terminal:");
                for term in &cost.terminal_terms {
                    println!("  {:+.4} * {}", term.weight, term.kind);
                }
            }
        }
    }
    Ok(())
}
