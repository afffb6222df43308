//! Ant colony system with order-exchange and migration local search, adapted
//! to time-aware, multidimensional, heterogeneous placement.
//!
//! Ants construct assignments one request at a time, restricted to one fewer
//! server than the best known solution. Server choice follows the
//! pseudo-random proportional rule over per-server pheromone and a heuristic
//! that favors balanced, tight placements. Constructions that were forced to
//! overload a server go through a greedy repair phase that migrates or swaps
//! requests away from overloaded servers. The global pheromone update
//! rewards the servers of the best solution found so far.
//!
//! Time enters through the feasibility rule (capacity must hold at every
//! instant of the request's window) and through time-averaged remaining
//! capacity in the heuristic, objective and pheromone formulas. Averages over
//! an unbounded window are taken up to the instance horizon, past which
//! usage is constant.

use crate::heuristics::{self, HeuristicConfig};
use crate::model::{
    count_servers, Allocation, InstanceId, Interval, ModelError, ProblemInstance, TimePoint,
    VmRequest,
};
use crate::solve::{SolveError, SolveOutcome};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct AcoParams {
    pub ant_count: usize,
    pub iteration_limit: usize,
    /// Global evaporation rate, in (0, 1).
    pub evaporation_rate: f64,
    /// Probability of greedy exploitation in the choice rule, in [0, 1].
    pub exploitation_prob: f64,
    /// Initial pheromone; derived from the seeding solution when absent.
    pub pheromone_init: Option<f64>,
    /// Pheromone exponent.
    pub alpha: f64,
    /// Heuristic exponent.
    pub beta: f64,
    pub seed: u64,
}

impl Default for AcoParams {
    fn default() -> Self {
        Self {
            ant_count: 10,
            iteration_limit: 5,
            evaporation_rate: 0.1,
            exploitation_prob: 0.9,
            pheromone_init: None,
            alpha: 1.0,
            beta: 2.0,
            seed: 0,
        }
    }
}

impl AcoParams {
    fn validate(&self) -> Result<(), SolveError> {
        if self.ant_count == 0 || self.iteration_limit == 0 {
            return Err(SolveError::InvalidConfig(
                "ant_count and iteration_limit must be positive".into(),
            ));
        }
        if !(self.evaporation_rate > 0.0 && self.evaporation_rate < 1.0) {
            return Err(SolveError::InvalidConfig(
                "evaporation_rate must lie in (0, 1)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.exploitation_prob) {
            return Err(SolveError::InvalidConfig(
                "exploitation_prob must lie in [0, 1]".into(),
            ));
        }
        if let Some(tau0) = self.pheromone_init {
            if !(tau0 > 0.0) {
                return Err(SolveError::InvalidConfig(
                    "pheromone_init must be positive".into(),
                ));
            }
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return Err(SolveError::InvalidConfig(
                "alpha and beta must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Colony state: per-server pheromone plus the working construction's
/// reservations, demands in micro-units against the pool capacities.
pub struct AcoState<'a> {
    instance: &'a ProblemInstance,
    horizon: TimePoint,
    tau: Vec<f64>,
    /// Request indices hosted per server in the working construction.
    entries: Vec<Vec<usize>>,
    /// Usage flag per server; placing sets it, and it can be set explicitly
    /// to model an open-but-empty server.
    open: Vec<bool>,
    caps: Vec<Vec<i64>>,
    demands: Vec<Vec<i64>>,
    windows: Vec<Interval>,
    dims: usize,
}

impl<'a> AcoState<'a> {
    pub fn new(instance: &'a ProblemInstance, tau0: f64) -> Self {
        let pool = instance.pool();
        let caps = pool
            .instances()
            .iter()
            .map(|inst| {
                pool.types()[inst.type_index]
                    .capacity
                    .amounts()
                    .iter()
                    .map(|a| a.micros())
                    .collect()
            })
            .collect();
        Self {
            instance,
            horizon: instance.horizon(),
            tau: vec![tau0; pool.len()],
            entries: vec![Vec::new(); pool.len()],
            open: vec![false; pool.len()],
            caps,
            demands: instance
                .vms()
                .iter()
                .map(|v| v.demand.amounts().iter().map(|a| a.micros()).collect())
                .collect(),
            windows: instance.vms().iter().map(|v| v.window).collect(),
            dims: instance.dimensions().len(),
        }
    }

    pub fn instance(&self) -> &ProblemInstance {
        self.instance
    }

    pub fn tau(&self, server: InstanceId) -> f64 {
        self.tau[server.0 as usize]
    }

    pub fn is_open(&self, server: InstanceId) -> bool {
        self.open[server.0 as usize]
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// Marks a server used without placing anything on it.
    pub fn mark_open(&mut self, server: InstanceId) {
        self.open[server.0 as usize] = true;
    }

    /// Unchecked insert of request `vm_index` onto `server`; constructions
    /// use this for forced overload placements as well.
    pub fn place(&mut self, server: InstanceId, vm_index: usize) {
        self.entries[server.0 as usize].push(vm_index);
        self.open[server.0 as usize] = true;
    }

    fn remove(&mut self, server: InstanceId, vm_index: usize) {
        let list = &mut self.entries[server.0 as usize];
        if let Some(pos) = list.iter().position(|&v| v == vm_index) {
            list.remove(pos);
        }
        if list.is_empty() {
            self.open[server.0 as usize] = false;
        }
    }

    /// Clears the working construction; pheromone persists.
    pub fn reset(&mut self) {
        for list in &mut self.entries {
            list.clear();
        }
        self.open.fill(false);
    }

    /// Bounded span of a window for time averaging.
    fn averaging_span(&self, window: &Interval) -> (TimePoint, TimePoint) {
        let start = window.start();
        let end = window
            .end()
            .unwrap_or_else(|| self.horizon.max(start + 1));
        (start, end.max(start + 1))
    }

    fn overlap_len(&self, window: &Interval, lo: TimePoint, hi: TimePoint) -> u64 {
        let (start, end) = self.averaging_span(window);
        let s = start.max(lo);
        let e = end.min(hi);
        e.saturating_sub(s)
    }

    /// Time-averaged remaining capacity per dimension over `[lo, hi)`, in
    /// units (not micros). Negative values mean the span is overloaded.
    fn avg_remaining(&self, server: InstanceId, lo: TimePoint, hi: TimePoint) -> Vec<f64> {
        let idx = server.0 as usize;
        let span = (hi - lo) as f64;
        (0..self.dims)
            .map(|d| {
                let mut integral = 0.0;
                for &vm in &self.entries[idx] {
                    let len = self.overlap_len(&self.windows[vm], lo, hi) as f64;
                    integral += len * self.demands[vm][d] as f64;
                }
                (self.caps[idx][d] as f64 - integral / span) / 1e6
            })
            .collect()
    }

    /// Event-point feasibility of adding `vm_index` to `server` (capacity
    /// holds at every instant of the request's window).
    pub fn fits(&self, server: InstanceId, vm_index: usize) -> bool {
        let idx = server.0 as usize;
        let window = &self.windows[vm_index];
        let dem = &self.demands[vm_index];
        let cap = &self.caps[idx];
        let check = |t: TimePoint| -> bool {
            (0..self.dims).all(|d| {
                let mut used = dem[d];
                for &other in &self.entries[idx] {
                    if self.windows[other].contains(t) {
                        used += self.demands[other][d];
                    }
                }
                used <= cap[d]
            })
        };
        if !check(window.start()) {
            return false;
        }
        self.entries[idx].iter().all(|&other| {
            let s = self.windows[other].start();
            s <= window.start() || !window.contains(s) || check(s)
        })
    }

    /// Worst normalized overshoot across event instants; zero when feasible.
    fn server_overload(&self, server: InstanceId) -> f64 {
        let idx = server.0 as usize;
        let cap = &self.caps[idx];
        let mut worst = 0.0f64;
        for &vm in &self.entries[idx] {
            let t = self.windows[vm].start();
            let mut excess = 0.0;
            for d in 0..self.dims {
                let mut used = 0i64;
                for &other in &self.entries[idx] {
                    if self.windows[other].contains(t) {
                        used += self.demands[other][d];
                    }
                }
                if used > cap[d] {
                    excess += (used - cap[d]) as f64 / cap[d].max(1) as f64;
                }
            }
            worst = worst.max(excess);
        }
        worst
    }

    fn construction_feasible(&self) -> bool {
        (0..self.tau.len()).all(|i| self.server_overload(InstanceId(i as u32)) == 0.0)
    }

    /// Normalized post-placement slack per dimension: time-averaged remaining
    /// over the request's window, minus its demand, scaled by capacity.
    fn slacks(&self, server: InstanceId, vm_index: usize) -> Vec<f64> {
        let idx = server.0 as usize;
        let (lo, hi) = self.averaging_span(&self.windows[vm_index]);
        let avg = self.avg_remaining(server, lo, hi);
        (0..self.dims)
            .map(|d| {
                let cap = self.caps[idx][d] as f64 / 1e6;
                let demand = self.demands[vm_index][d] as f64 / 1e6;
                if cap == 0.0 {
                    0.0
                } else {
                    (avg[d] - demand) / cap
                }
            })
            .collect()
    }
}

/// Servers able to host the request over its whole window in every
/// dimension.
pub fn feasible_servers(vm: &VmRequest, state: &AcoState) -> Vec<InstanceId> {
    let Some(vm_index) = state
        .instance
        .vms()
        .iter()
        .position(|v| v.id == vm.id)
    else {
        return Vec::new();
    };
    (0..state.tau.len())
        .map(|i| InstanceId(i as u32))
        .filter(|&id| state.fits(id, vm_index))
        .collect()
}

/// Attractiveness of a feasible placement: balance of the post-placement
/// slack across dimensions over its average magnitude.
pub fn heuristic_info(
    vm: &VmRequest,
    server: InstanceId,
    state: &AcoState,
) -> Result<f64, SolveError> {
    let vm_index = state
        .instance
        .vms()
        .iter()
        .position(|v| v.id == vm.id)
        .ok_or(SolveError::Model(ModelError::EmptyInput))?;
    if !state.fits(server, vm_index) {
        return Err(SolveError::Model(ModelError::InfeasibleReservation));
    }
    Ok(heuristic_info_unchecked(state, server, vm_index))
}

fn heuristic_info_unchecked(state: &AcoState, server: InstanceId, vm_index: usize) -> f64 {
    let slacks = state.slacks(server, vm_index);
    let dims = slacks.len();
    let pair_term = if dims < 2 {
        0.0
    } else {
        let pairs = (dims * (dims - 1) / 2) as f64;
        let mut total = 0.0;
        for a in 0..dims {
            for b in a + 1..dims {
                total += (slacks[a] - slacks[b]).abs();
            }
        }
        total / pairs
    };
    let mean_abs = slacks.iter().map(|s| s.abs()).sum::<f64>() / dims as f64;
    (1.0 - pair_term) / (mean_abs + 1.0)
}

/// Summed absolute normalized slack after placing the request; ranks how far
/// an assignment sits from a perfect fit, including infeasible ones.
pub fn overload_ratio(server: InstanceId, vm: &VmRequest, state: &AcoState) -> f64 {
    let Some(vm_index) = state
        .instance
        .vms()
        .iter()
        .position(|v| v.id == vm.id)
    else {
        return 0.0;
    };
    overload_ratio_by_index(state, server, vm_index)
}

fn overload_ratio_by_index(state: &AcoState, server: InstanceId, vm_index: usize) -> f64 {
    state
        .slacks(server, vm_index)
        .iter()
        .map(|s| s.abs())
        .sum()
}

/// Aggregate wasted capacity of the working construction: for every open
/// server, the summed normalized remaining capacity averaged over its busy
/// span. Lower is better among solutions with equal server counts.
pub fn solution_objective(state: &AcoState) -> f64 {
    let mut total = 0.0;
    for i in 0..state.tau.len() {
        let id = InstanceId(i as u32);
        if !state.open[i] {
            continue;
        }
        total += server_waste(state, id);
    }
    total
}

fn server_waste(state: &AcoState, server: InstanceId) -> f64 {
    let idx = server.0 as usize;
    if state.entries[idx].is_empty() {
        // open but idle: full capacity remains in every dimension
        return state.dims as f64;
    }
    // busy span: union of hosted windows
    let mut spans: Vec<(TimePoint, TimePoint)> = state.entries[idx]
        .iter()
        .map(|&vm| state.averaging_span(&state.windows[vm]))
        .collect();
    spans.sort_unstable();
    let mut merged: Vec<(TimePoint, TimePoint)> = Vec::new();
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some((_, end)) if lo <= *end => *end = (*end).max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let len: u64 = merged.iter().map(|(lo, hi)| hi - lo).sum();
    let len = len.max(1) as f64;
    (0..state.dims)
        .map(|d| {
            let mut integral = 0.0;
            for &vm in &state.entries[idx] {
                let (lo, hi) = state.averaging_span(&state.windows[vm]);
                integral += (hi - lo) as f64 * state.demands[vm][d] as f64;
            }
            let cap = state.caps[idx][d] as f64;
            if cap == 0.0 {
                0.0
            } else {
                ((cap - integral / len) / cap).abs()
            }
        })
        .sum()
}

/// A completed construction worth keeping: assignment by request position,
/// plus its two-level score.
#[derive(Debug, Clone)]
pub struct AcoSolution {
    pub assignment: Vec<InstanceId>,
    pub server_count: usize,
    pub objective: f64,
}

impl AcoSolution {
    fn better_than(&self, other: &AcoSolution) -> bool {
        (self.server_count, self.objective) < (other.server_count, other.objective)
    }

    fn to_allocation(&self, instance: &ProblemInstance) -> Allocation {
        let mut alloc = Allocation::new();
        for (vm, &server) in instance.vms().iter().zip(&self.assignment) {
            alloc.assign(vm.id, server);
        }
        alloc
    }
}

/// Evaporates every server and deposits on the servers of the global best.
/// The deposit is the inverse best server count plus the inverse of one plus
/// the best solution's summed normalized remaining capacity on that server.
pub fn pheromone_update(state: &mut AcoState, global_best: &AcoSolution, evaporation_rate: f64) {
    // rebuild the best solution's loads to measure its per-server remaining
    let snapshot_entries = state.entries.clone();
    let snapshot_open = state.open.clone();
    state.reset();
    for (vm_index, &server) in global_best.assignment.iter().enumerate() {
        state.place(server, vm_index);
    }
    let f1 = global_best.server_count.max(1) as f64;
    let mut deposits: Vec<(usize, f64)> = Vec::new();
    for i in 0..state.tau.len() {
        if state.open[i] {
            let waste = server_waste(state, InstanceId(i as u32));
            deposits.push((i, 1.0 / f1 + 1.0 / (waste + 1.0)));
        }
    }
    state.entries = snapshot_entries;
    state.open = snapshot_open;
    let rho = evaporation_rate;
    for tau in state.tau.iter_mut() {
        *tau *= 1.0 - rho;
    }
    for (i, delta) in deposits {
        state.tau[i] += rho * delta;
    }
}

fn mix_seed(seed: u64, iteration: usize, ant: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((iteration as u64) << 20)
        .wrapping_add(ant as u64)
}

struct Construction {
    assignment: Vec<InstanceId>,
    overloaded: bool,
}

/// One ant: requests in instance order, servers drawn from the first
/// `target` pool instances (the feasible-set index never exceeds the target
/// server count), forced minimum-overload placement when nothing in the
/// target range fits. Ants differ only through the stochastic choice rule.
fn construct(
    state: &mut AcoState,
    params: &AcoParams,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Construction {
    let n = state.demands.len();
    let prefix = target.min(state.instance.pool().len());
    let order: Vec<usize> = (0..n).collect();
    let mut assignment = vec![InstanceId(0); n];
    let mut overloaded = false;

    for &vm_index in &order {
        let mut candidates: Vec<InstanceId> = Vec::new();
        for i in 0..prefix {
            let id = InstanceId(i as u32);
            if state.fits(id, vm_index) {
                candidates.push(id);
            }
        }
        let chosen = if candidates.is_empty() {
            // nothing in the target range fits: overload the least bad server
            overloaded = true;
            let mut best: Option<(f64, InstanceId)> = None;
            for i in 0..prefix {
                let id = InstanceId(i as u32);
                let score = overload_ratio_by_index(state, id, vm_index);
                if best.map_or(true, |(s, _)| score < s) {
                    best = Some((score, id));
                }
            }
            best.expect("the target range is non-empty").1
        } else {
            let scores: Vec<f64> = candidates
                .iter()
                .map(|&id| {
                    let eta = heuristic_info_unchecked(state, id, vm_index).max(0.0);
                    state.tau[id.0 as usize].powf(params.alpha) * eta.powf(params.beta)
                })
                .collect();
            let q: f64 = rng.random();
            if q <= params.exploitation_prob {
                let mut best = 0usize;
                for (i, &s) in scores.iter().enumerate() {
                    if s > scores[best] {
                        best = i;
                    }
                }
                candidates[best]
            } else {
                let total: f64 = scores.iter().sum();
                if total <= 0.0 {
                    candidates[rng.random_range(0..candidates.len())]
                } else {
                    let mut pick = rng.random_range(0.0..total);
                    let mut chosen = candidates[candidates.len() - 1];
                    for (i, &s) in scores.iter().enumerate() {
                        if pick < s {
                            chosen = candidates[i];
                            break;
                        }
                        pick -= s;
                    }
                    chosen
                }
            }
        };
        state.place(chosen, vm_index);
        assignment[vm_index] = chosen;
    }
    Construction {
        assignment,
        overloaded,
    }
}

/// Order-exchange and migration repair, one sweep: for each overloaded
/// server, first try the best overload-reducing swap of one of its requests
/// against a request on another used server, then try to migrate requests
/// away until the server clears. A construction that still overloads after
/// the sweep is discarded.
fn repair(state: &mut AcoState, assignment: &mut [InstanceId]) -> bool {
    let servers = state.tau.len();
    let overloaded: Vec<InstanceId> = (0..servers)
        .map(|i| InstanceId(i as u32))
        .filter(|&id| state.server_overload(id) > 0.0)
        .collect();
    for source in overloaded {
        // order exchange: the single most overload-reducing swap
        let before = state.server_overload(source);
        if before == 0.0 {
            continue;
        }
        let mut best_swap: Option<(f64, usize, usize, InstanceId)> = None;
        for &vm_a in &state.entries[source.0 as usize].clone() {
            for i in 0..servers {
                let other = InstanceId(i as u32);
                if other == source || !state.open[i] {
                    continue;
                }
                let other_before = state.server_overload(other);
                for &vm_b in &state.entries[other.0 as usize].clone() {
                    state.remove(source, vm_a);
                    state.remove(other, vm_b);
                    state.place(source, vm_b);
                    state.place(other, vm_a);
                    let after = state.server_overload(source) + state.server_overload(other);
                    state.remove(source, vm_b);
                    state.remove(other, vm_a);
                    state.place(source, vm_a);
                    state.place(other, vm_b);
                    let delta = before + other_before - after;
                    if delta > 1e-12 && best_swap.map_or(true, |(d, _, _, _)| delta > d) {
                        best_swap = Some((delta, vm_a, vm_b, other));
                    }
                }
            }
        }
        if let Some((_, vm_a, vm_b, other)) = best_swap {
            state.remove(source, vm_a);
            state.remove(other, vm_b);
            state.place(source, vm_b);
            state.place(other, vm_a);
            assignment[vm_a] = other;
            assignment[vm_b] = source;
        }
        // migration: move requests off while overload remains, largest first
        let mut hosted = state.entries[source.0 as usize].clone();
        hosted.sort_by(|&a, &b| {
            let size_a: i64 = state.demands[a].iter().sum();
            let size_b: i64 = state.demands[b].iter().sum();
            size_b.cmp(&size_a)
        });
        for &vm_index in &hosted {
            if state.server_overload(source) == 0.0 {
                break;
            }
            let mut best: Option<(f64, InstanceId)> = None;
            for i in 0..servers {
                let id = InstanceId(i as u32);
                if id == source || !state.open[i] {
                    continue;
                }
                if state.fits(id, vm_index) {
                    let score = overload_ratio_by_index(state, id, vm_index);
                    if best.map_or(true, |(s, _)| score < s) {
                        best = Some((score, id));
                    }
                }
            }
            if let Some((_, target)) = best {
                state.remove(source, vm_index);
                state.place(target, vm_index);
                assignment[vm_index] = target;
            }
        }
    }
    state.construction_feasible()
}

pub fn oemacs_plus_solve(
    instance: &ProblemInstance,
    params: &AcoParams,
) -> Result<SolveOutcome, SolveError> {
    params.validate()?;
    let started = Instant::now();
    if instance.vms().is_empty() {
        return Ok(SolveOutcome::new(
            Allocation::new(),
            true,
            started.elapsed().as_secs_f64(),
            vec![(0.0, 0)],
        ));
    }
    // seed solution from plain first fit; it sets the initial target and the
    // fallback output
    let init = heuristics::solve_first_fit(instance, &HeuristicConfig::ff())?;
    let n = instance.vms().len();
    let tau0 = params
        .pheromone_init
        .unwrap_or(1.0 / (n as f64 * count_servers(&init).max(1) as f64));
    let mut state = AcoState::new(instance, tau0);

    let mut best = {
        let mut assignment = vec![InstanceId(0); n];
        for (idx, vm) in instance.vms().iter().enumerate() {
            let server = init.server_of(vm.id).expect("seed allocation is total");
            assignment[idx] = server;
            state.place(server, idx);
        }
        let objective = solution_objective(&state);
        AcoSolution {
            assignment,
            server_count: count_servers(&init),
            objective,
        }
    };
    state.reset();

    let mut trace = vec![(started.elapsed().as_secs_f64(), best.server_count)];
    for iteration in 0..params.iteration_limit {
        let target = best.server_count.saturating_sub(1).max(1);
        let mut iteration_best: Option<AcoSolution> = None;
        for ant in 0..params.ant_count {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(params.seed, iteration, ant));
            state.reset();
            let mut construction = construct(&mut state, params, target, &mut rng);
            let feasible = if construction.overloaded {
                repair(&mut state, &mut construction.assignment)
            } else {
                true
            };
            if !feasible {
                continue;
            }
            let solution = AcoSolution {
                server_count: state.open_count(),
                objective: solution_objective(&state),
                assignment: construction.assignment,
            };
            if iteration_best
                .as_ref()
                .map_or(true, |cur| solution.better_than(cur))
            {
                iteration_best = Some(solution);
            }
        }
        if let Some(candidate) = iteration_best {
            if candidate.better_than(&best) {
                best = candidate;
                trace.push((started.elapsed().as_secs_f64(), best.server_count));
            }
        }
        pheromone_update(&mut state, &best, params.evaporation_rate);
    }

    let allocation = best.to_allocation(instance);
    debug_assert!(crate::model::validate_allocation(instance, &allocation).ok());
    Ok(SolveOutcome::new(
        allocation,
        false,
        started.elapsed().as_secs_f64(),
        trace,
    ))
}
