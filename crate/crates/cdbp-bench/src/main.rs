use anyhow::Result;
use cdbp_bench::{Budgets, ExperimentConfig, ExperimentKind, SolverKind};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "bench", about = "Experiment harness for the cdbp solver suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write one CSV row per (solver, workload, seed)
    /// cell.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// One of: real, convergence, shuffle, scale, timefactor, single.
    #[arg(long)]
    experiment: ExperimentKind,
    /// Comma-separated subset of ff, ffplus, ddff, ddffplus, bb, dcbb,
    /// oemacsplus. Defaults depend on the experiment.
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<SolverKind>,
    /// Number of seeds per cell (seeds 0..k).
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Workload sizes.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Arrival upper bounds b for the timefactor sweep.
    #[arg(long = "arrival-b", value_delimiter = ',')]
    arrival_b: Vec<u64>,
    /// Mean durations mu for the timefactor sweep.
    #[arg(long = "duration-mu", value_delimiter = ',')]
    duration_mu: Vec<f64>,
    /// Time budget for dcbb, seconds.
    #[arg(long = "budget-dcbb", default_value_t = 50.0)]
    budget_dcbb: f64,
    /// Time budget for bb, seconds.
    #[arg(long = "budget-bb", default_value_t = 1000.0)]
    budget_bb: f64,
    /// Iteration limit for oemacsplus.
    #[arg(long = "oemacs-iters", default_value_t = 5)]
    oemacs_iters: usize,
    /// Incumbent sampling instants for the convergence experiment, seconds.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0])]
    checkpoints: Vec<f64>,
    /// SWF trace to ingest (required for the real experiment).
    #[arg(long)]
    swf: Option<PathBuf>,
    /// Qualified-record cap for SWF ingestion.
    #[arg(long = "swf-limit", default_value_t = 500)]
    swf_limit: usize,
    /// Output CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

fn default_solvers(experiment: ExperimentKind) -> Vec<SolverKind> {
    match experiment {
        ExperimentKind::Shuffle => vec![
            SolverKind::Ff,
            SolverKind::FfPlus,
            SolverKind::Ddff,
            SolverKind::DdffPlus,
        ],
        ExperimentKind::Convergence => {
            vec![SolverKind::Bb, SolverKind::Dcbb, SolverKind::OemacsPlus]
        }
        _ => SolverKind::ALL.to_vec(),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let solvers = if args.solvers.is_empty() {
                default_solvers(args.experiment)
            } else {
                args.solvers.clone()
            };
            let n_list = if args.n.is_empty() {
                match args.experiment {
                    ExperimentKind::Scale | ExperimentKind::Shuffle => {
                        (1..=14).map(|k| k * 24).collect()
                    }
                    ExperimentKind::TimeFactor => vec![160],
                    _ => vec![24],
                }
            } else {
                args.n.clone()
            };
            let sweep = vec![60, 180, 300, 420];
            let config = ExperimentConfig {
                experiment: args.experiment,
                solvers,
                seeds: (0..args.seeds.max(1)).collect(),
                budgets: Budgets {
                    dcbb_secs: args.budget_dcbb,
                    bb_secs: args.budget_bb,
                    oemacs_iters: args.oemacs_iters,
                },
                n_list,
                arrival_b_list: if args.arrival_b.is_empty() {
                    sweep.clone()
                } else {
                    args.arrival_b.clone()
                },
                duration_mu_list: if args.duration_mu.is_empty() {
                    sweep.iter().map(|&b| b as f64).collect()
                } else {
                    args.duration_mu.clone()
                },
                checkpoints: args.checkpoints.clone(),
                swf: args.swf.clone(),
                swf_limit: args.swf_limit,
                out: args.out.clone(),
            };
            let summary = cdbp_bench::run(&config)?;
            println!("{summary}");
            println!("wrote {}", config.out.display());
        }
    }
    Ok(())
}
