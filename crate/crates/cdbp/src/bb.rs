//! Exact anytime branch-and-bound over request-to-server assignments.
//!
//! Depth-first search assigns one request per level, branching over every
//! opened server that can hold it plus one fresh server per type (identical
//! unused instances are interchangeable). Nodes are cut when the opened
//! count plus an admissible bound on additional servers reaches the
//! incumbent. The incumbent starts from a `DDFF+` solution, so the solver
//! always has a feasible answer to return when the time limit expires.
//!
//! When every pair of windows overlaps, the instance collapses to static
//! vector packing; all requests on one server then coexist at some instant,
//! so a running remaining-capacity vector replaces per-instant checks.

use crate::heuristics::{self, HeuristicConfig};
use crate::model::{
    count_servers, Allocation, InstanceId, Interval, ProblemInstance, ReservationTimeline,
    ServerType, TimePoint, VmRequest,
};
use crate::solve::{SolveError, SolveOutcome};
use std::collections::HashMap;
use std::time::Instant;

/// Branching order over requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VmOrder {
    /// Normalized demand volume times duration, descending.
    VolumeDesc,
    /// Window duration descending, unbounded first.
    DurationDesc,
    /// Instance order.
    Input,
}

#[derive(Debug, Clone)]
pub struct BbConfig {
    /// Wall-clock budget in seconds.
    pub time_limit: f64,
    pub vm_order: VmOrder,
    /// Branch one fresh instance per type instead of every unused instance.
    pub symmetry_breaking: bool,
}

impl Default for BbConfig {
    fn default() -> Self {
        Self {
            time_limit: 1000.0,
            vm_order: VmOrder::VolumeDesc,
            symmetry_breaking: true,
        }
    }
}

/// Seed for the internal `DDFF+` incumbent; fixed so runs are reproducible.
const INIT_SHUFFLE_SEED: u64 = 0xddf0;

/// Admissible bound on servers needed beyond those already used in
/// `timeline`: peak leftover demand per dimension divided by the largest
/// capacity any type offers in that dimension.
///
/// Usage rises only at arrivals, so evaluating remaining-demand minus
/// used-server free space at every arrival instant is exact for the peak.
pub fn lower_bound(
    remaining: &[&VmRequest],
    types: &[ServerType],
    timeline: &ReservationTimeline,
) -> usize {
    if remaining.is_empty() || types.is_empty() {
        return 0;
    }
    let dims = types[0].capacity.len();
    let max_cap: Vec<i64> = (0..dims)
        .map(|d| {
            types
                .iter()
                .map(|t| t.capacity.get(d).micros())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let used: Vec<_> = timeline
        .used_instances()
        .map(|id| timeline.server(id).expect("used id is valid"))
        .collect();
    let mut events: Vec<TimePoint> = remaining.iter().map(|v| v.window.start()).collect();
    for server in &used {
        events.extend(server.entries().iter().map(|(w, _)| w.start()));
    }
    events.sort_unstable();
    events.dedup();

    let mut worst = 0usize;
    for &t in &events {
        for d in 0..dims {
            if max_cap[d] == 0 {
                continue;
            }
            let demand: i64 = remaining
                .iter()
                .filter(|v| v.window.contains(t))
                .map(|v| v.demand.get(d).micros())
                .sum();
            let free: i64 = used
                .iter()
                .map(|s| s.capacity().get(d).micros() - s.usage_at(t).get(d).micros())
                .sum();
            let deficit = demand - free;
            if deficit > 0 {
                let need = ((deficit + max_cap[d] - 1) / max_cap[d]) as usize;
                worst = worst.max(need);
            }
        }
    }
    worst
}

/// Minimum feasible server count by straight enumeration, for use as a test
/// oracle. Feasibility is checked by dense per-instant usage arrays, fully
/// independent of the event-point machinery. Guarded because the search is
/// exponential and the arrays are proportional to the horizon.
pub fn exhaustive_optimal(instance: &ProblemInstance) -> Result<usize, SolveError> {
    let n = instance.vms().len();
    let m = instance.pool().len();
    if n > 10 || m > 6 {
        return Err(SolveError::GuardViolation(format!(
            "exhaustive_optimal requires n <= 10 and m <= 6, got n={n}, m={m}"
        )));
    }
    if n == 0 {
        return Ok(0);
    }
    let horizon = instance.horizon() as usize;
    if horizon > 200_000 {
        return Err(SolveError::GuardViolation(format!(
            "exhaustive_optimal requires a horizon of at most 200000 s, got {horizon}"
        )));
    }
    let dims = instance.dimensions().len();
    let caps: Vec<Vec<i64>> = instance
        .pool()
        .instances()
        .iter()
        .map(|inst| {
            instance.pool().types()[inst.type_index]
                .capacity
                .amounts()
                .iter()
                .map(|a| a.micros())
                .collect()
        })
        .collect();
    let mut usage = vec![vec![0i64; horizon * dims]; m];
    let mut load_counts = vec![0usize; m];
    let spans: Vec<(usize, usize)> = instance
        .vms()
        .iter()
        .map(|v| {
            let start = v.window.start() as usize;
            let end = v.window.end().map_or(horizon, |e| e as usize).min(horizon);
            (start, end)
        })
        .collect();
    let demands: Vec<Vec<i64>> = instance
        .vms()
        .iter()
        .map(|v| v.demand.amounts().iter().map(|a| a.micros()).collect())
        .collect();

    struct Enum<'a> {
        usage: &'a mut Vec<Vec<i64>>,
        load_counts: &'a mut Vec<usize>,
        caps: &'a [Vec<i64>],
        spans: &'a [(usize, usize)],
        demands: &'a [Vec<i64>],
        dims: usize,
        best: usize,
        used_now: usize,
    }
    impl Enum<'_> {
        fn fits(&self, server: usize, vm: usize) -> bool {
            let (start, end) = self.spans[vm];
            let dem = &self.demands[vm];
            let grid = &self.usage[server];
            for t in start..end {
                for d in 0..self.dims {
                    if grid[t * self.dims + d] + dem[d] > self.caps[server][d] {
                        return false;
                    }
                }
            }
            true
        }
        fn apply(&mut self, server: usize, vm: usize, sign: i64) {
            let (start, end) = self.spans[vm];
            for t in start..end {
                for d in 0..self.dims {
                    self.usage[server][t * self.dims + d] += sign * self.demands[vm][d];
                }
            }
        }
        fn dfs(&mut self, vm: usize) {
            if self.used_now >= self.best {
                return;
            }
            if vm == self.demands.len() {
                self.best = self.used_now;
                return;
            }
            for server in 0..self.caps.len() {
                if !self.fits(server, vm) {
                    continue;
                }
                self.apply(server, vm, 1);
                self.load_counts[server] += 1;
                if self.load_counts[server] == 1 {
                    self.used_now += 1;
                }
                self.dfs(vm + 1);
                if self.load_counts[server] == 1 {
                    self.used_now -= 1;
                }
                self.load_counts[server] -= 1;
                self.apply(server, vm, -1);
            }
        }
    }
    let mut search = Enum {
        usage: &mut usage,
        load_counts: &mut load_counts,
        caps: &caps,
        spans: &spans,
        demands: &demands,
        dims,
        best: m + 1,
        used_now: 0,
    };
    search.dfs(0);
    if search.best > m {
        return Err(SolveError::Infeasible);
    }
    Ok(search.best)
}

enum Candidate {
    Open(usize),
    Fresh(usize),
    FreshInstance(InstanceId, usize),
}

/// Snapshot of an incumbent: which slot each request used, and each slot's
/// type plus explicit instance when symmetry breaking was off.
struct BestSolution {
    assignments: Vec<(usize, usize)>,
    slots: Vec<(usize, Option<InstanceId>)>,
}

impl BestSolution {
    /// Maps the k-th opened slot of each type onto the k-th pool instance of
    /// that type, then resolves the assignment list.
    fn into_allocation(
        self,
        pool: &crate::model::ServerPool,
        vms: &[VmRequest],
    ) -> Allocation {
        let type_instances: Vec<Vec<InstanceId>> = (0..pool.types().len())
            .map(|ty| pool.instances_of_type(ty))
            .collect();
        let mut per_type_next = vec![0usize; pool.types().len()];
        let slot_ids: Vec<InstanceId> = self
            .slots
            .iter()
            .map(|&(ty, explicit)| match explicit {
                Some(id) => id,
                None => {
                    let id = type_instances[ty][per_type_next[ty]];
                    per_type_next[ty] += 1;
                    id
                }
            })
            .collect();
        let mut alloc = Allocation::new();
        for (vm_idx, slot) in self.assignments {
            alloc.assign(vms[vm_idx].id, slot_ids[slot]);
        }
        alloc
    }
}

struct OpenServer {
    type_index: usize,
    /// Static mode: remaining capacity in micros.
    remaining: Vec<i64>,
    /// Timeline mode: indices of hosted requests.
    entries: Vec<usize>,
    /// Present when symmetry breaking is off and a specific instance was
    /// picked.
    explicit: Option<InstanceId>,
}

struct Search {
    order: Vec<usize>,
    /// For each depth, the depth of the nearest earlier interchangeable
    /// request. Identical requests are forced onto non-decreasing slot
    /// indices, which removes their permutation symmetry.
    prev_identical: Vec<Option<usize>>,
    demands: Vec<Vec<i64>>,
    windows: Vec<Interval>,
    dims: usize,
    type_caps: Vec<Vec<i64>>,
    type_avail: Vec<u32>,
    type_instances: Vec<Vec<InstanceId>>,
    max_cap: Vec<i64>,
    static_mode: bool,
    symmetry: bool,
    instance_used: Vec<bool>,
    // search state
    opened: Vec<OpenServer>,
    used_per_type: Vec<u32>,
    free_total: Vec<i64>,
    suffix: Vec<Vec<i64>>,
    slot_stack: Vec<usize>,
    best_count: usize,
    best: Option<BestSolution>,
    trace: Vec<(f64, usize)>,
    nodes: u64,
    started: Instant,
    limit: f64,
    aborted: bool,
}

impl Search {
    fn time_up(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.nodes += 1;
        if self.nodes & 0x3ff == 0 && self.started.elapsed().as_secs_f64() >= self.limit {
            self.aborted = true;
        }
        self.aborted
    }

    fn static_lb(&self, depth: usize) -> usize {
        let suf = &self.suffix[depth];
        let mut lb = 0usize;
        for d in 0..self.dims {
            if self.max_cap[d] == 0 {
                continue;
            }
            let deficit = suf[d] - self.free_total[d];
            if deficit > 0 {
                lb = lb.max(((deficit + self.max_cap[d] - 1) / self.max_cap[d]) as usize);
            }
        }
        lb
    }

    fn timeline_lb(&self, depth: usize) -> usize {
        let remaining = &self.order[depth..];
        let mut events: Vec<TimePoint> = remaining
            .iter()
            .map(|&v| self.windows[v].start())
            .collect();
        for server in &self.opened {
            events.extend(server.entries.iter().map(|&v| self.windows[v].start()));
        }
        events.sort_unstable();
        events.dedup();
        let mut lb = 0usize;
        for &t in &events {
            for d in 0..self.dims {
                if self.max_cap[d] == 0 {
                    continue;
                }
                let mut demand = 0i64;
                for &v in remaining {
                    if self.windows[v].contains(t) {
                        demand += self.demands[v][d];
                    }
                }
                let mut free = 0i64;
                for server in &self.opened {
                    let mut used = 0i64;
                    for &v in &server.entries {
                        if self.windows[v].contains(t) {
                            used += self.demands[v][d];
                        }
                    }
                    free += self.type_caps[server.type_index][d] - used;
                }
                let deficit = demand - free;
                if deficit > 0 {
                    lb = lb.max(((deficit + self.max_cap[d] - 1) / self.max_cap[d]) as usize);
                }
            }
        }
        lb
    }

    fn fits_timeline(&self, server: &OpenServer, vm: usize) -> bool {
        let window = &self.windows[vm];
        let dem = &self.demands[vm];
        let cap = &self.type_caps[server.type_index];
        let check = |t: TimePoint| -> bool {
            for d in 0..self.dims {
                let mut used = dem[d];
                for &other in &server.entries {
                    if self.windows[other].contains(t) {
                        used += self.demands[other][d];
                    }
                }
                if used > cap[d] {
                    return false;
                }
            }
            true
        };
        if !check(window.start()) {
            return false;
        }
        for &other in &server.entries {
            let s = self.windows[other].start();
            if s > window.start() && window.contains(s) && !check(s) {
                return false;
            }
        }
        true
    }

    fn candidates(&self, depth: usize, vm: usize) -> Vec<Candidate> {
        let dem = &self.demands[vm];
        // interchangeable requests are forced onto non-decreasing slots
        let min_slot = if self.symmetry {
            self.prev_identical[depth]
                .map(|d| self.slot_stack[d])
                .unwrap_or(0)
        } else {
            0
        };
        let mut scored: Vec<(f64, u8, usize, Candidate)> = Vec::new();
        for (slot, server) in self.opened.iter().enumerate().skip(min_slot) {
            let cap = &self.type_caps[server.type_index];
            let fits = if self.static_mode {
                (0..self.dims).all(|d| server.remaining[d] >= dem[d])
            } else {
                self.fits_timeline(server, vm)
            };
            if !fits {
                continue;
            }
            // tightest leftover first
            let score: f64 = if self.static_mode {
                (0..self.dims)
                    .map(|d| (server.remaining[d] - dem[d]) as f64 / cap[d].max(1) as f64)
                    .sum()
            } else {
                let t = self.windows[vm].start();
                let mut s = 0.0;
                for d in 0..self.dims {
                    let mut used = 0i64;
                    for &other in &server.entries {
                        if self.windows[other].contains(t) {
                            used += self.demands[other][d];
                        }
                    }
                    s += (cap[d] - used - dem[d]) as f64 / cap[d].max(1) as f64;
                }
                s
            };
            scored.push((score, 0, slot, Candidate::Open(slot)));
        }
        // Fresh servers rank after every fitting opened server. Among types,
        // prefer the one that can host the most copies of this shape; a type
        // holding two memory-heavy requests beats a "tighter" type that
        // strands its other dimensions on one.
        let fresh_score = |ty: usize| -> f64 {
            let cap = &self.type_caps[ty];
            let copies = (0..self.dims)
                .map(|d| {
                    if dem[d] == 0 {
                        i64::MAX
                    } else {
                        cap[d] / dem[d]
                    }
                })
                .min()
                .unwrap_or(0);
            let tight: f64 = (0..self.dims)
                .map(|d| (cap[d] - dem[d]) as f64 / cap[d].max(1) as f64)
                .sum();
            tight - copies.min(1 << 20) as f64 * 1000.0
        };
        if self.symmetry {
            for ty in 0..self.type_caps.len() {
                if self.used_per_type[ty] >= self.type_avail[ty] {
                    continue;
                }
                let cap = &self.type_caps[ty];
                if (0..self.dims).all(|d| cap[d] >= dem[d]) {
                    scored.push((fresh_score(ty), 1, ty, Candidate::Fresh(ty)));
                }
            }
        } else {
            for (ty, ids) in self.type_instances.iter().enumerate() {
                let cap = &self.type_caps[ty];
                if !(0..self.dims).all(|d| cap[d] >= dem[d]) {
                    continue;
                }
                for id in ids {
                    if !self.instance_used[id.0 as usize] {
                        scored.push((
                            fresh_score(ty),
                            1,
                            id.0 as usize,
                            Candidate::FreshInstance(*id, ty),
                        ));
                    }
                }
            }
        }
        scored.sort_by(|a, b| {
            a.1.cmp(&b.1)
                .then(a.0.partial_cmp(&b.0).expect("scores are finite"))
                .then(a.2.cmp(&b.2))
        });
        // drop opened servers identical to an already-kept one
        let mut kept: Vec<(f64, usize)> = Vec::new();
        let mut out = Vec::with_capacity(scored.len());
        for (score, kind, _, cand) in scored {
            if self.symmetry && self.static_mode && kind == 0 {
                if let Candidate::Open(slot) = cand {
                    let server = &self.opened[slot];
                    let duplicate = kept
                        .iter()
                        .rev()
                        .take_while(|(s, _)| *s == score)
                        .any(|&(_, other)| {
                            let o = &self.opened[other];
                            o.type_index == server.type_index && o.remaining == server.remaining
                        });
                    if duplicate {
                        continue;
                    }
                    kept.push((score, slot));
                }
            }
            out.push(cand);
        }
        out
    }

    fn record_incumbent(&mut self) {
        let count = self.opened.len();
        if count >= self.best_count {
            return;
        }
        self.best_count = count;
        self.best = Some(BestSolution {
            assignments: self
                .slot_stack
                .iter()
                .enumerate()
                .map(|(depth, &slot)| (self.order[depth], slot))
                .collect(),
            slots: self
                .opened
                .iter()
                .map(|s| (s.type_index, s.explicit))
                .collect(),
        });
        self.trace
            .push((self.started.elapsed().as_secs_f64(), count));
    }

    fn dfs(&mut self, depth: usize) {
        if self.time_up() {
            return;
        }
        if depth == self.order.len() {
            self.record_incumbent();
            return;
        }
        let lb = if self.static_mode {
            self.static_lb(depth)
        } else {
            self.timeline_lb(depth)
        };
        if self.opened.len() + lb >= self.best_count {
            return;
        }
        let vm = self.order[depth];
        for cand in self.candidates(depth, vm) {
            match cand {
                Candidate::Open(slot) => {
                    self.place(slot, vm);
                    self.slot_stack.push(slot);
                    self.dfs(depth + 1);
                    self.slot_stack.pop();
                    self.unplace(slot, vm);
                }
                Candidate::Fresh(ty) => {
                    let slot = self.open(ty, None);
                    self.place(slot, vm);
                    self.slot_stack.push(slot);
                    self.dfs(depth + 1);
                    self.slot_stack.pop();
                    self.unplace(slot, vm);
                    self.close(slot);
                }
                Candidate::FreshInstance(id, ty) => {
                    self.instance_used[id.0 as usize] = true;
                    let slot = self.open(ty, Some(id));
                    self.place(slot, vm);
                    self.slot_stack.push(slot);
                    self.dfs(depth + 1);
                    self.slot_stack.pop();
                    self.unplace(slot, vm);
                    self.close(slot);
                    self.instance_used[id.0 as usize] = false;
                }
            }
            if self.aborted {
                return;
            }
        }
    }

    fn open(&mut self, ty: usize, explicit: Option<InstanceId>) -> usize {
        self.used_per_type[ty] += 1;
        if self.static_mode {
            for d in 0..self.dims {
                self.free_total[d] += self.type_caps[ty][d];
            }
        }
        self.opened.push(OpenServer {
            type_index: ty,
            remaining: self.type_caps[ty].clone(),
            entries: Vec::new(),
            explicit,
        });
        self.opened.len() - 1
    }

    fn close(&mut self, slot: usize) {
        let server = self.opened.pop().expect("slot is the top of the stack");
        debug_assert_eq!(slot, self.opened.len());
        self.used_per_type[server.type_index] -= 1;
        if self.static_mode {
            for d in 0..self.dims {
                self.free_total[d] -= self.type_caps[server.type_index][d];
            }
        }
    }

    fn place(&mut self, slot: usize, vm: usize) {
        if self.static_mode {
            for d in 0..self.dims {
                self.opened[slot].remaining[d] -= self.demands[vm][d];
                self.free_total[d] -= self.demands[vm][d];
            }
        } else {
            self.opened[slot].entries.push(vm);
        }
    }

    fn unplace(&mut self, slot: usize, vm: usize) {
        if self.static_mode {
            for d in 0..self.dims {
                self.opened[slot].remaining[d] += self.demands[vm][d];
                self.free_total[d] += self.demands[vm][d];
            }
        } else {
            let popped = self.opened[slot].entries.pop();
            debug_assert_eq!(popped, Some(vm));
        }
    }
}

pub fn bb_solve(instance: &ProblemInstance, config: &BbConfig) -> Result<SolveOutcome, SolveError> {
    bb_solve_inner(instance, config, false)
}

/// `force_timeline` disables the static-packing reduction, for equivalence
/// tests.
pub(crate) fn bb_solve_inner(
    instance: &ProblemInstance,
    config: &BbConfig,
    force_timeline: bool,
) -> Result<SolveOutcome, SolveError> {
    if config.time_limit <= 0.0 {
        return Err(SolveError::InvalidConfig(
            "time_limit must be positive".into(),
        ));
    }
    let started = Instant::now();
    let vms = instance.vms();
    if vms.is_empty() {
        return Ok(SolveOutcome::new(
            Allocation::new(),
            true,
            started.elapsed().as_secs_f64(),
            vec![(0.0, 0)],
        ));
    }

    let init = heuristics::solve_ddff(instance, &HeuristicConfig::ddff_plus(INIT_SHUFFLE_SEED));

    let dims = instance.dimensions().len();
    let pool = instance.pool();
    let horizon = instance.horizon();
    let type_caps: Vec<Vec<i64>> = pool
        .types()
        .iter()
        .map(|t| t.capacity.amounts().iter().map(|a| a.micros()).collect())
        .collect();
    let type_instances: Vec<Vec<InstanceId>> = (0..pool.types().len())
        .map(|ty| pool.instances_of_type(ty))
        .collect();
    let type_avail: Vec<u32> = type_instances.iter().map(|v| v.len() as u32).collect();
    let max_cap: Vec<i64> = (0..dims)
        .map(|d| {
            type_caps
                .iter()
                .zip(&type_avail)
                .filter(|(_, &avail)| avail > 0)
                .map(|(c, _)| c[d])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let demands: Vec<Vec<i64>> = vms
        .iter()
        .map(|v| v.demand.amounts().iter().map(|a| a.micros()).collect())
        .collect();
    let windows: Vec<Interval> = vms.iter().map(|v| v.window).collect();

    let mut order: Vec<usize> = (0..vms.len()).collect();
    match config.vm_order {
        VmOrder::Input => {}
        VmOrder::DurationDesc => order.sort_by(|&a, &b| {
            windows[b]
                .duration()
                .cmp(&windows[a].duration())
                .then(vms[a].id.cmp(&vms[b].id))
        }),
        VmOrder::VolumeDesc => {
            let volume = |i: usize| -> f64 {
                let span = match windows[i].end() {
                    Some(e) => (e - windows[i].start()) as f64,
                    None => (horizon.saturating_sub(windows[i].start())).max(1) as f64,
                };
                let size: f64 = (0..dims)
                    .map(|d| {
                        if max_cap[d] == 0 {
                            0.0
                        } else {
                            demands[i][d] as f64 / max_cap[d] as f64
                        }
                    })
                    .sum();
                size * span
            };
            order.sort_by(|&a, &b| {
                volume(b)
                    .partial_cmp(&volume(a))
                    .expect("volumes are finite")
                    .then(vms[a].id.cmp(&vms[b].id))
            });
        }
    }

    let static_mode = !force_timeline
        && vms
            .iter()
            .enumerate()
            .all(|(i, a)| vms[i + 1..].iter().all(|b| a.window.overlaps(&b.window)));

    let mut suffix = vec![vec![0i64; dims]; vms.len() + 1];
    for depth in (0..vms.len()).rev() {
        for d in 0..dims {
            suffix[depth][d] = suffix[depth + 1][d] + demands[order[depth]][d];
        }
    }

    // interchangeability: equal demands; windows must also match unless the
    // static reduction applies
    let mut prev_identical: Vec<Option<usize>> = vec![None; vms.len()];
    let mut last_by_key: HashMap<(Vec<i64>, Option<(TimePoint, Option<TimePoint>)>), usize> =
        HashMap::new();
    for (depth, &v) in order.iter().enumerate() {
        let key = (
            demands[v].clone(),
            if static_mode {
                None
            } else {
                Some((windows[v].start(), windows[v].end()))
            },
        );
        prev_identical[depth] = last_by_key.insert(key, depth);
    }

    let mut search = Search {
        order,
        prev_identical,
        demands,
        windows,
        dims,
        type_caps,
        type_avail,
        type_instances,
        max_cap,
        static_mode,
        symmetry: config.symmetry_breaking,
        instance_used: vec![false; pool.len()],
        opened: Vec::new(),
        used_per_type: vec![0; pool.types().len()],
        free_total: vec![0; dims],
        suffix,
        slot_stack: Vec::new(),
        best_count: usize::MAX,
        best: None,
        trace: Vec::new(),
        nodes: 0,
        started,
        limit: config.time_limit,
        aborted: false,
    };

    let init_alloc = match &init {
        Ok(alloc) => {
            search.best_count = count_servers(alloc);
            search
                .trace
                .push((started.elapsed().as_secs_f64(), search.best_count));
            Some(alloc.clone())
        }
        Err(_) => None,
    };

    search.dfs(0);
    let proved = !search.aborted;
    let elapsed = started.elapsed().as_secs_f64();

    let allocation = match search.best.take() {
        Some(snapshot) => snapshot.into_allocation(pool, vms),
        None => match init_alloc {
            Some(alloc) => alloc,
            None => {
                return Err(if proved {
                    SolveError::Infeasible
                } else {
                    SolveError::NoSolutionWithinBudget
                })
            }
        },
    };

    Ok(SolveOutcome::new(
        allocation,
        proved,
        elapsed,
        search.trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        validate_allocation, ResourceVector, ServerPool, ServerType, VmId,
    };
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vm(id: u64, start: u64, secs: u64, demand: &[f64]) -> VmRequest {
        VmRequest::new(
            VmId(id),
            Interval::bounded(start, secs).unwrap(),
            ResourceVector::from_f64s(demand).unwrap(),
        )
    }

    /// Four requests that need four servers statically but two with time
    /// multiplexing.
    fn schematic() -> ProblemInstance {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[10.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[4]).unwrap();
        let vms = vec![
            vm(1, 0, 10, &[6.0]),
            vm(2, 0, 8, &[6.0]),
            vm(3, 8, 12, &[6.0]),
            vm(4, 12, 10, &[6.0]),
        ];
        ProblemInstance::new(vec!["units".into()], pool, vms).unwrap()
    }

    fn random_small_instance(seed: u64) -> ProblemInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let types = vec![
            ServerType::new("big", ResourceVector::from_f64s(&[8.0, 16.0]).unwrap()),
            ServerType::new("small", ResourceVector::from_f64s(&[4.0, 16.0]).unwrap()),
        ];
        let pool = ServerPool::blocks(types, &[3, 2]).unwrap();
        let n = rng.random_range(1..=7);
        let vms: Vec<VmRequest> = (0..n)
            .map(|i| {
                let start = rng.random_range(0..30u64);
                let secs = rng.random_range(1..=20u64);
                let cpu = rng.random_range(1..=4) as f64;
                let mem = rng.random_range(1..=8) as f64;
                vm(i, start, secs, &[cpu, mem])
            })
            .collect();
        ProblemInstance::new(vec!["cpu".into(), "mem".into()], pool, vms).unwrap()
    }

    #[test]
    fn schematic_needs_two_servers_and_proves_it() {
        let outcome = bb_solve(&schematic(), &BbConfig::default()).unwrap();
        assert_eq!(outcome.server_count, 2);
        assert!(outcome.proved_optimal);
        assert!(validate_allocation(&schematic(), &outcome.allocation).ok());
    }

    #[test]
    fn single_vm_needs_one_server() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[2]).unwrap();
        let instance =
            ProblemInstance::new(vec!["u".into()], pool, vec![vm(0, 0, 5, &[2.0])]).unwrap();
        let outcome = bb_solve(&instance, &BbConfig::default()).unwrap();
        assert_eq!(outcome.server_count, 1);
        assert!(outcome.proved_optimal);
    }

    #[test]
    fn matches_exhaustive_oracle_on_random_instances() {
        for seed in 0..40 {
            let instance = random_small_instance(seed);
            let oracle = exhaustive_optimal(&instance);
            let outcome = bb_solve(&instance, &BbConfig::default());
            match (oracle, outcome) {
                (Ok(opt), Ok(out)) => {
                    assert!(out.proved_optimal, "seed {seed} did not prove");
                    assert_eq!(out.server_count, opt, "seed {seed}");
                    assert!(validate_allocation(&instance, &out.allocation).ok());
                }
                (Err(SolveError::Infeasible), Err(_)) => {}
                (o, b) => panic!("seed {seed}: oracle {o:?} vs bb {:?}", b.map(|x| x.server_count)),
            }
        }
    }

    #[test]
    fn vm_orders_agree_on_the_optimum() {
        for seed in [3, 17] {
            let instance = random_small_instance(seed);
            let mut counts = Vec::new();
            for order in [VmOrder::VolumeDesc, VmOrder::DurationDesc, VmOrder::Input] {
                let config = BbConfig {
                    vm_order: order,
                    ..BbConfig::default()
                };
                if let Ok(out) = bb_solve(&instance, &config) {
                    assert!(out.proved_optimal);
                    counts.push(out.server_count);
                }
            }
            counts.dedup();
            assert_eq!(counts.len(), 1, "seed {seed}: orders disagree");
        }
    }

    #[test]
    fn symmetry_breaking_does_not_change_the_optimum() {
        for seed in 0..12 {
            let instance = random_small_instance(seed);
            let with = bb_solve(&instance, &BbConfig::default());
            let without = bb_solve(
                &instance,
                &BbConfig {
                    symmetry_breaking: false,
                    ..BbConfig::default()
                },
            );
            match (with, without) {
                (Ok(a), Ok(b)) => {
                    assert!(a.proved_optimal && b.proved_optimal);
                    assert_eq!(a.server_count, b.server_count, "seed {seed}");
                }
                (Err(_), Err(_)) => {}
                other => panic!("seed {seed}: asymmetric outcome {other:?}"),
            }
        }
    }

    #[test]
    fn static_reduction_matches_timeline_search() {
        // all windows share t=10, so the static path applies
        let types = vec![
            ServerType::new("a", ResourceVector::from_f64s(&[8.0, 16.0]).unwrap()),
            ServerType::new("b", ResourceVector::from_f64s(&[4.0, 16.0]).unwrap()),
        ];
        for seed in 0..15 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = ServerPool::blocks(types.clone(), &[3, 2]).unwrap();
            let n = rng.random_range(2..=7);
            let vms: Vec<VmRequest> = (0..n)
                .map(|i| {
                    let start = rng.random_range(0..=10u64);
                    let end = rng.random_range(11..=30u64);
                    vm(
                        i,
                        start,
                        end - start,
                        &[rng.random_range(1..=4) as f64, rng.random_range(1..=8) as f64],
                    )
                })
                .collect();
            let instance =
                ProblemInstance::new(vec!["cpu".into(), "mem".into()], pool, vms).unwrap();
            let fast = bb_solve_inner(&instance, &BbConfig::default(), false);
            let slow = bb_solve_inner(&instance, &BbConfig::default(), true);
            match (fast, slow) {
                (Ok(a), Ok(b)) => {
                    assert!(a.proved_optimal && b.proved_optimal);
                    assert_eq!(a.server_count, b.server_count, "seed {seed}");
                }
                (Err(_), Err(_)) => {}
                other => panic!("seed {seed}: {other:?}"),
            }
        }
    }

    #[test]
    fn incumbent_trace_is_non_increasing_and_budget_respected() {
        let instance = random_small_instance(99);
        let config = BbConfig {
            time_limit: 0.5,
            ..BbConfig::default()
        };
        let out = bb_solve(&instance, &config).unwrap();
        assert!(out
            .incumbent_trace
            .windows(2)
            .all(|w| w[1].1 <= w[0].1));
        assert_eq!(out.incumbent_trace.last().unwrap().1, out.server_count);
        assert!(out.elapsed <= config.time_limit + 0.1);
    }

    #[test]
    fn infeasible_pool_is_reported() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[10.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[1]).unwrap();
        let instance = ProblemInstance::new(
            vec!["u".into()],
            pool,
            vec![vm(0, 0, 10, &[6.0]), vm(1, 5, 10, &[6.0])],
        )
        .unwrap();
        assert_eq!(
            bb_solve(&instance, &BbConfig::default()).unwrap_err(),
            SolveError::Infeasible
        );
    }

    #[test]
    fn lower_bound_examples() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0, 16.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types.clone(), &[4]).unwrap();
        let timeline = ReservationTimeline::for_pool(&pool);
        assert_eq!(lower_bound(&[], &types, &timeline), 0);

        // three concurrent requests each demanding the full largest capacity
        let full: Vec<VmRequest> = (0..3).map(|i| vm(i, 0, 10, &[8.0, 16.0])).collect();
        let refs: Vec<&VmRequest> = full.iter().collect();
        assert!(lower_bound(&refs, &types, &timeline) >= 3);
    }

    #[test]
    fn lower_bound_is_admissible_on_random_instances() {
        for seed in 0..25 {
            let instance = random_small_instance(seed);
            if let Ok(opt) = exhaustive_optimal(&instance) {
                let refs: Vec<&VmRequest> = instance.vms().iter().collect();
                let empty = ReservationTimeline::for_pool(instance.pool());
                let lb = lower_bound(&refs, instance.pool().types(), &empty);
                assert!(lb <= opt, "seed {seed}: lb {lb} > opt {opt}");
            }
        }
    }

    #[test]
    fn exhaustive_examples_and_guard() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[10.0]).unwrap(),
        )];
        let empty = ProblemInstance::new(
            vec!["u".into()],
            ServerPool::blocks(types.clone(), &[2]).unwrap(),
            vec![],
        )
        .unwrap();
        assert_eq!(exhaustive_optimal(&empty).unwrap(), 0);

        assert_eq!(exhaustive_optimal(&schematic()).unwrap(), 2);

        let overlap = ProblemInstance::new(
            vec!["u".into()],
            ServerPool::blocks(types.clone(), &[3]).unwrap(),
            vec![vm(0, 0, 10, &[10.0]), vm(1, 5, 10, &[10.0])],
        )
        .unwrap();
        assert_eq!(exhaustive_optimal(&overlap).unwrap(), 2);

        let big_pool = ProblemInstance::new(
            vec!["u".into()],
            ServerPool::blocks(types, &[7]).unwrap(),
            vec![vm(0, 0, 10, &[1.0])],
        )
        .unwrap();
        assert!(matches!(
            exhaustive_optimal(&big_pool),
            Err(SolveError::GuardViolation(_))
        ));
    }

    #[test]
    fn empty_instance_solves_trivially() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[10.0]).unwrap(),
        )];
        let instance = ProblemInstance::new(
            vec!["u".into()],
            ServerPool::blocks(types, &[1]).unwrap(),
            vec![],
        )
        .unwrap();
        let out = bb_solve(&instance, &BbConfig::default()).unwrap();
        assert_eq!(out.server_count, 0);
        assert!(out.proved_optimal);
    }
}
