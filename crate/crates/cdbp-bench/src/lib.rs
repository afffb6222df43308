//! Experiment harness over the solver suite: runs (solver, workload, seed)
//! cells, re-validates every allocation, and writes one CSV row per cell.

use anyhow::{anyhow, bail, Context, Result};
use cdbp::bb::{bb_solve, BbConfig};
use cdbp::dcbb::{dcbb_solve, DcbbConfig};
use cdbp::heuristics::{solve_ddff, solve_first_fit, HeuristicConfig};
use cdbp::model::{count_servers, validate_allocation, ProblemInstance};
use cdbp::oemacs::{oemacs_plus_solve, AcoParams};
use cdbp::solve::SolveOutcome;
use cdbp::workloads::{self, SyntheticSpec};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SolverKind {
    Ff,
    FfPlus,
    Ddff,
    DdffPlus,
    Bb,
    Dcbb,
    OemacsPlus,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Ff,
        SolverKind::FfPlus,
        SolverKind::Ddff,
        SolverKind::DdffPlus,
        SolverKind::Bb,
        SolverKind::Dcbb,
        SolverKind::OemacsPlus,
    ];

    pub fn is_search_based(self) -> bool {
        matches!(
            self,
            SolverKind::Bb | SolverKind::Dcbb | SolverKind::OemacsPlus
        )
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolverKind::Ff => "ff",
            SolverKind::FfPlus => "ffplus",
            SolverKind::Ddff => "ddff",
            SolverKind::DdffPlus => "ddffplus",
            SolverKind::Bb => "bb",
            SolverKind::Dcbb => "dcbb",
            SolverKind::OemacsPlus => "oemacsplus",
        };
        f.write_str(name)
    }
}

impl FromStr for SolverKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ff" => Ok(SolverKind::Ff),
            "ffplus" | "ff+" => Ok(SolverKind::FfPlus),
            "ddff" => Ok(SolverKind::Ddff),
            "ddffplus" | "ddff+" => Ok(SolverKind::DdffPlus),
            "bb" => Ok(SolverKind::Bb),
            "dcbb" => Ok(SolverKind::Dcbb),
            "oemacsplus" | "oemacs+" | "oemacs" => Ok(SolverKind::OemacsPlus),
            other => Err(anyhow!("unknown solver {other:?}")),
        }
    }
}

/// Search budgets handed to the respective solvers.
#[derive(Debug, Clone, Copy)]
pub struct Budgets {
    pub dcbb_secs: f64,
    pub bb_secs: f64,
    pub oemacs_iters: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            dcbb_secs: 50.0,
            bb_secs: 1000.0,
            oemacs_iters: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Real,
    Convergence,
    Shuffle,
    Scale,
    TimeFactor,
    Single,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ExperimentKind::Real => "real",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Shuffle => "shuffle",
            ExperimentKind::Scale => "scale",
            ExperimentKind::TimeFactor => "timefactor",
            ExperimentKind::Single => "single",
        };
        f.write_str(name)
    }
}

impl FromStr for ExperimentKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "real" => Ok(ExperimentKind::Real),
            "convergence" => Ok(ExperimentKind::Convergence),
            "shuffle" => Ok(ExperimentKind::Shuffle),
            "scale" => Ok(ExperimentKind::Scale),
            "timefactor" => Ok(ExperimentKind::TimeFactor),
            "single" => Ok(ExperimentKind::Single),
            other => Err(anyhow!("unknown experiment {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    pub budgets: Budgets,
    /// Workload sizes for scale/shuffle/convergence/single.
    pub n_list: Vec<usize>,
    /// Arrival upper bounds for the timefactor sweep.
    pub arrival_b_list: Vec<u64>,
    /// Mean durations for the timefactor sweep.
    pub duration_mu_list: Vec<f64>,
    /// Incumbent sampling instants for the convergence experiment.
    pub checkpoints: Vec<f64>,
    pub swf: Option<PathBuf>,
    pub swf_limit: usize,
    pub out: PathBuf,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            bail!("solver set must be non-empty");
        }
        if self.seeds.is_empty() {
            bail!("at least one seed is required");
        }
        if self.experiment == ExperimentKind::Real && self.swf.is_none() {
            bail!("the real experiment requires --swf <path>");
        }
        Ok(())
    }
}

/// One emitted CSV record.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub solver: String,
    pub seed: u64,
    pub n_vms: usize,
    pub arrival_a: Option<u64>,
    pub arrival_b: Option<u64>,
    pub duration_mu: Option<f64>,
    pub duration_sigma: Option<f64>,
    pub server_count: usize,
    pub elapsed_s: f64,
    pub proved_optimal: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SolverStats {
    pub runs: usize,
    pub mean_servers: f64,
    pub stdev_servers: f64,
    pub mean_elapsed: f64,
}

#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub failures: usize,
    pub per_solver: BTreeMap<String, SolverStats>,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows written: {} (failures: {})", self.rows, self.failures)?;
        for (solver, stats) in &self.per_solver {
            writeln!(
                f,
                "  {solver:<10} runs {:>4}  #servers {:>7.2} +- {:>5.2}  elapsed {:>8.3}s",
                stats.runs, stats.mean_servers, stats.stdev_servers, stats.mean_elapsed
            )?;
        }
        Ok(())
    }
}

/// Runs one solver on one instance, measuring wall time around the solve
/// only.
pub fn solve(
    kind: SolverKind,
    instance: &ProblemInstance,
    budgets: &Budgets,
    seed: u64,
) -> Result<SolveOutcome> {
    let heuristic = |config: HeuristicConfig, sorted: bool| -> Result<SolveOutcome> {
        let started = Instant::now();
        let alloc = if sorted {
            solve_ddff(instance, &config)?
        } else {
            solve_first_fit(instance, &config)?
        };
        let elapsed = started.elapsed().as_secs_f64();
        let count = count_servers(&alloc);
        Ok(SolveOutcome {
            allocation: alloc,
            server_count: count,
            proved_optimal: false,
            elapsed,
            incumbent_trace: vec![(elapsed, count)],
        })
    };
    let outcome = match kind {
        SolverKind::Ff => heuristic(HeuristicConfig::ff(), false)?,
        SolverKind::FfPlus => heuristic(HeuristicConfig::ff_plus(seed), false)?,
        SolverKind::Ddff => heuristic(HeuristicConfig::ddff(), true)?,
        SolverKind::DdffPlus => heuristic(HeuristicConfig::ddff_plus(seed), true)?,
        SolverKind::Bb => bb_solve(
            instance,
            &BbConfig {
                time_limit: budgets.bb_secs,
                ..BbConfig::default()
            },
        )?,
        SolverKind::Dcbb => dcbb_solve(
            instance,
            &DcbbConfig {
                total_time_budget: budgets.dcbb_secs,
                seed,
                ..DcbbConfig::default()
            },
        )?,
        SolverKind::OemacsPlus => oemacs_plus_solve(
            instance,
            &AcoParams {
                iteration_limit: budgets.oemacs_iters,
                seed,
                ..AcoParams::default()
            },
        )?,
    };
    Ok(outcome)
}

/// Samples a search solver's incumbent trace at the requested instants with
/// step interpolation.
pub fn convergence_trace(
    solver: SolverKind,
    instance: &ProblemInstance,
    budgets: &Budgets,
    seed: u64,
    checkpoints: &[f64],
) -> Result<Vec<(f64, usize)>> {
    if !solver.is_search_based() {
        bail!("convergence traces require a search-based solver, got {solver}");
    }
    let outcome = solve(solver, instance, budgets, seed)?;
    Ok(sample_trace(&outcome.incumbent_trace, checkpoints))
}

pub fn sample_trace(trace: &[(f64, usize)], checkpoints: &[f64]) -> Vec<(f64, usize)> {
    checkpoints
        .iter()
        .map(|&t| {
            let value = trace
                .iter()
                .take_while(|(elapsed, _)| *elapsed <= t)
                .last()
                .or_else(|| trace.first())
                .map(|&(_, count)| count)
                .unwrap_or(0);
            (t, value)
        })
        .collect()
}

struct Cell {
    seed: u64,
    n_vms: usize,
    arrival_a: Option<u64>,
    arrival_b: Option<u64>,
    duration_mu: Option<f64>,
    duration_sigma: Option<f64>,
    instance: ProblemInstance,
}

fn synthetic_cell(n: usize, b: u64, mu: f64, seed: u64) -> Result<Cell> {
    let mut spec = SyntheticSpec::with_defaults(n, seed);
    spec.arrival_max = b;
    spec.duration_mean = mu;
    let instance = workloads::synthetic_instance(&spec).context("workload generation")?;
    Ok(Cell {
        seed,
        n_vms: n,
        arrival_a: Some(spec.arrival_min),
        arrival_b: Some(b),
        duration_mu: Some(mu),
        duration_sigma: Some(spec.duration_std),
        instance,
    })
}

fn build_cells(config: &ExperimentConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    match config.experiment {
        ExperimentKind::Real => {
            let path = config.swf.as_ref().expect("validated");
            let (instance, report) = workloads::swf_instance(path, config.swf_limit)
                .map_err(|e| anyhow!("ingesting {path:?}: {e}"))?;
            eprintln!(
                "ingested {} requests ({} dropped, {} beyond limit, {} capped)",
                report.emitted,
                report.total_dropped(),
                report.truncated,
                report.capped_to_largest
            );
            for &seed in &config.seeds {
                cells.push(Cell {
                    seed,
                    n_vms: instance.vms().len(),
                    arrival_a: None,
                    arrival_b: None,
                    duration_mu: None,
                    duration_sigma: None,
                    instance: instance.clone(),
                });
            }
        }
        ExperimentKind::Scale
        | ExperimentKind::Shuffle
        | ExperimentKind::Convergence
        | ExperimentKind::Single => {
            for &n in &config.n_list {
                for &seed in &config.seeds {
                    cells.push(synthetic_cell(n, 240, 360.0, seed)?);
                }
            }
        }
        ExperimentKind::TimeFactor => {
            let n = *config.n_list.first().unwrap_or(&160);
            for &b in &config.arrival_b_list {
                for &seed in &config.seeds {
                    cells.push(synthetic_cell(n, b, 360.0, seed)?);
                }
            }
            for &mu in &config.duration_mu_list {
                for &seed in &config.seeds {
                    cells.push(synthetic_cell(n, 240, mu, seed)?);
                }
            }
        }
    }
    Ok(cells)
}

/// Executes the configured experiment, writing the CSV and returning summary
/// statistics. Solver failures are reported and skipped; the run continues.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let cells = build_cells(config)?;
    let mut writer = csv::Writer::from_path(&config.out)
        .with_context(|| format!("opening {:?}", config.out))?;
    let mut summary = RunSummary::default();
    let mut per_solver: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();

    for cell in &cells {
        for &solver in &config.solvers {
            let outcome = match solve(solver, &cell.instance, &config.budgets, cell.seed) {
                Ok(outcome) => outcome,
                Err(err) => {
                    summary.failures += 1;
                    eprintln!(
                        "cell failed: experiment={} solver={solver} seed={} n={}: {err}",
                        config.experiment, cell.seed, cell.n_vms
                    );
                    continue;
                }
            };
            if !validate_allocation(&cell.instance, &outcome.allocation).ok() {
                summary.failures += 1;
                eprintln!(
                    "allocation failed validation: solver={solver} seed={}",
                    cell.seed
                );
                continue;
            }
            let mut emit = |server_count: usize, elapsed: f64, proved: bool| -> Result<()> {
                writer.serialize(ResultRow {
                    experiment: config.experiment.to_string(),
                    solver: solver.to_string(),
                    seed: cell.seed,
                    n_vms: cell.n_vms,
                    arrival_a: cell.arrival_a,
                    arrival_b: cell.arrival_b,
                    duration_mu: cell.duration_mu,
                    duration_sigma: cell.duration_sigma,
                    server_count,
                    elapsed_s: elapsed,
                    proved_optimal: proved,
                })?;
                Ok(())
            };
            if config.experiment == ExperimentKind::Convergence {
                if !solver.is_search_based() {
                    continue;
                }
                for (t, count) in sample_trace(&outcome.incumbent_trace, &config.checkpoints) {
                    emit(count, t, outcome.proved_optimal)?;
                    summary.rows += 1;
                }
            } else {
                emit(outcome.server_count, outcome.elapsed, outcome.proved_optimal)?;
                summary.rows += 1;
            }
            per_solver
                .entry(solver.to_string())
                .or_default()
                .push((outcome.server_count, outcome.elapsed));
        }
    }
    writer.flush()?;

    for (solver, samples) in per_solver {
        let n = samples.len() as f64;
        let mean = samples.iter().map(|(c, _)| *c as f64).sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples
                .iter()
                .map(|(c, _)| (*c as f64 - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        summary.per_solver.insert(
            solver,
            SolverStats {
                runs: samples.len(),
                mean_servers: mean,
                stdev_servers: var.sqrt(),
                mean_elapsed: samples.iter().map(|(_, e)| *e).sum::<f64>() / n,
            },
        );
    }
    Ok(summary)
}
