//! Divide-and-conquer branch-and-bound.
//!
//! Cluster the requests by window overlap, run branch-and-bound on each
//! clustered set under a slice of the time budget, remap the per-cluster
//! servers onto a shared pool (clusters never overlap in time, so instances
//! are reused across them), and place the left set with `DDFF+` against the
//! merged reservation state.
//!
//! The solver is anytime: it starts from `DDFF+` seeds for every cluster,
//! reassembles a complete solution whenever a cluster finishes, and returns
//! the best assembly observed.

use crate::bb::{bb_solve, BbConfig};
use crate::clustering::mgc_cluster;
use crate::heuristics::{self, HeuristicConfig};
use crate::model::{
    count_servers, Allocation, InstanceId, ProblemInstance, ReservationTimeline, ServerPool, VmId,
    VmRequest,
};
use crate::solve::{SolveError, SolveOutcome};
use std::collections::BTreeMap;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetPolicy {
    /// Larger clusters get proportionally more of the remaining budget.
    ProportionalToClusterSize,
    /// Remaining budget split evenly over unsolved clusters.
    Equal,
}

#[derive(Debug, Clone)]
pub struct DcbbConfig {
    /// Wall-clock budget in seconds, covering clustering, per-cluster search,
    /// merging and left-set placement.
    pub total_time_budget: f64,
    pub per_cluster_budget_policy: BudgetPolicy,
    pub seed: u64,
}

impl Default for DcbbConfig {
    fn default() -> Self {
        Self {
            total_time_budget: 50.0,
            per_cluster_budget_policy: BudgetPolicy::ProportionalToClusterSize,
            seed: 0,
        }
    }
}

/// Remaps cluster-local server usage onto a shared pool: the k-th used
/// instance of a type inside each cluster solution becomes the k-th pool
/// instance of that type, so the merged count per type is the maximum over
/// clusters rather than the sum. Sound whenever cluster windows never cross.
pub fn merge_subsolutions(
    cluster_solutions: &[Allocation],
    pool: &ServerPool,
) -> Result<Allocation, SolveError> {
    let type_instances: Vec<Vec<InstanceId>> = (0..pool.types().len())
        .map(|ty| pool.instances_of_type(ty))
        .collect();
    let mut merged = Allocation::new();
    for solution in cluster_solutions {
        let mut used_per_type: Vec<Vec<InstanceId>> = vec![Vec::new(); pool.types().len()];
        for (_, server) in solution.iter() {
            let ty = pool.instance(server)?.type_index;
            if !used_per_type[ty].contains(&server) {
                used_per_type[ty].push(server);
            }
        }
        let mut remap: BTreeMap<InstanceId, InstanceId> = BTreeMap::new();
        for (ty, mut used) in used_per_type.into_iter().enumerate() {
            used.sort_unstable();
            for (rank, old) in used.into_iter().enumerate() {
                remap.insert(old, type_instances[ty][rank]);
            }
        }
        for (vm, server) in solution.iter() {
            merged.assign(vm, remap[&server]);
        }
    }
    Ok(merged)
}

/// Merges the current per-cluster allocations and schedules the left set
/// with `DDFF+` against the merged reservation state.
fn assemble(
    instance: &ProblemInstance,
    by_id: &BTreeMap<VmId, &VmRequest>,
    cluster_best: &[Allocation],
    ls_vms: &[&VmRequest],
    seed: u64,
) -> Result<Allocation, SolveError> {
    let merged = merge_subsolutions(cluster_best, instance.pool())?;
    let mut timeline = ReservationTimeline::for_pool(instance.pool());
    let mut full = Allocation::new();
    for (vm_id, server) in merged.iter() {
        let vm = by_id
            .get(&vm_id)
            .ok_or(SolveError::Model(crate::model::ModelError::EmptyInput))?;
        timeline.reserve(server, vm)?;
        full.assign(vm_id, server);
    }
    let mut ordered: Vec<&VmRequest> = ls_vms.to_vec();
    ordered.sort_by(|a, b| {
        b.window
            .duration()
            .cmp(&a.window.duration())
            .then(a.id.cmp(&b.id))
    });
    let scan = heuristics::shuffle_pool(instance.pool(), seed);
    heuristics::place_first_fit(&mut timeline, &scan, &ordered, &mut full)?;
    Ok(full)
}

pub fn dcbb_solve(
    instance: &ProblemInstance,
    config: &DcbbConfig,
) -> Result<SolveOutcome, SolveError> {
    if config.total_time_budget <= 0.0 {
        return Err(SolveError::InvalidConfig(
            "total_time_budget must be positive".into(),
        ));
    }
    let started = Instant::now();
    if instance.vms().is_empty() {
        return Ok(SolveOutcome::new(
            Allocation::new(),
            true,
            started.elapsed().as_secs_f64(),
            vec![(0.0, 0)],
        ));
    }

    let by_id: BTreeMap<VmId, &VmRequest> = instance.vms().iter().map(|v| (v.id, v)).collect();
    let partition = mgc_cluster(instance.vms());
    let mut clusters: Vec<Vec<VmRequest>> = partition
        .scs
        .iter()
        .map(|cs| cs.iter().map(|id| (*by_id[id]).clone()).collect())
        .collect();
    // biggest subproblems first so the anytime incumbent improves fastest
    clusters.sort_by_key(|c: &Vec<VmRequest>| std::cmp::Reverse(c.len()));
    let ls_vms: Vec<&VmRequest> = partition.ls.iter().map(|id| by_id[id]).collect();

    // per-cluster seeds so a budget-starved cluster still contributes
    let mut cluster_best: Vec<Allocation> = Vec::with_capacity(clusters.len());
    for (i, cluster) in clusters.iter().enumerate() {
        let sub = instance.with_vms(cluster.clone())?;
        let seed_alloc = heuristics::solve_ddff(
            &sub,
            &HeuristicConfig::ddff_plus(config.seed.wrapping_add(i as u64)),
        )?;
        cluster_best.push(seed_alloc);
    }
    let mut proved = vec![false; clusters.len()];

    let mut trace: Vec<(f64, usize)> = Vec::new();
    let mut best: Option<(Allocation, usize)> = None;
    let mut consider = |alloc: Allocation,
                        trace: &mut Vec<(f64, usize)>,
                        best: &mut Option<(Allocation, usize)>| {
        let count = count_servers(&alloc);
        if best.as_ref().map_or(true, |(_, c)| count < *c) {
            trace.push((started.elapsed().as_secs_f64(), count));
            *best = Some((alloc, count));
        }
    };

    consider(
        assemble(instance, &by_id, &cluster_best, &ls_vms, config.seed)?,
        &mut trace,
        &mut best,
    );

    let total_size: usize = clusters.iter().map(|c| c.len()).sum();
    let mut remaining_size = total_size;
    for i in 0..clusters.len() {
        let elapsed = started.elapsed().as_secs_f64();
        let budget_left = config.total_time_budget - elapsed;
        let share = match config.per_cluster_budget_policy {
            BudgetPolicy::ProportionalToClusterSize => {
                budget_left * clusters[i].len() as f64 / remaining_size.max(1) as f64
            }
            BudgetPolicy::Equal => budget_left / (clusters.len() - i) as f64,
        };
        remaining_size -= clusters[i].len();
        if share < 0.005 {
            continue; // budget exhausted; the seed stays in place
        }
        let sub = instance.with_vms(clusters[i].clone())?;
        let bb_config = BbConfig {
            time_limit: share,
            ..BbConfig::default()
        };
        if let Ok(outcome) = bb_solve(&sub, &bb_config) {
            proved[i] = outcome.proved_optimal;
            if outcome.server_count < count_servers(&cluster_best[i]) {
                cluster_best[i] = outcome.allocation;
            }
            consider(
                assemble(instance, &by_id, &cluster_best, &ls_vms, config.seed)?,
                &mut trace,
                &mut best,
            );
        }
    }

    let proved_optimal = ls_vms.is_empty() && proved.iter().all(|&p| p);
    let (allocation, _) = best.expect("at least the seeded assembly exists");
    Ok(SolveOutcome::new(
        allocation,
        proved_optimal,
        started.elapsed().as_secs_f64(),
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bb::exhaustive_optimal;
    use crate::model::{validate_allocation, Interval, ResourceVector, ServerType};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn vm(id: u64, start: u64, secs: u64, demand: &[f64]) -> VmRequest {
        VmRequest::new(
            VmId(id),
            Interval::bounded(start, secs).unwrap(),
            ResourceVector::from_f64s(demand).unwrap(),
        )
    }

    fn one_type_pool(cap: f64, count: u32) -> ServerPool {
        ServerPool::blocks(
            vec![ServerType::new(
                "a",
                ResourceVector::from_f64s(&[cap]).unwrap(),
            )],
            &[count],
        )
        .unwrap()
    }

    /// Two separated groups sharing a common instant each; the mgc left set
    /// is empty, so the merged result must be optimal.
    fn separated_groups() -> ProblemInstance {
        let pool = one_type_pool(10.0, 6);
        let vms = vec![
            vm(0, 0, 10, &[6.0]),
            vm(1, 2, 10, &[6.0]),
            vm(2, 4, 10, &[3.0]),
            vm(3, 100, 10, &[6.0]),
            vm(4, 102, 10, &[3.0]),
        ];
        ProblemInstance::new(vec!["u".into()], pool, vms).unwrap()
    }

    #[test]
    fn separated_groups_reach_the_oracle_optimum() {
        let instance = separated_groups();
        let partition = mgc_cluster(instance.vms());
        assert!(partition.ls.is_empty());
        let out = dcbb_solve(&instance, &DcbbConfig::default()).unwrap();
        let opt = exhaustive_optimal(&instance).unwrap();
        assert_eq!(out.server_count, opt);
        assert!(out.proved_optimal);
        assert!(validate_allocation(&instance, &out.allocation).ok());
    }

    #[test]
    fn left_set_instances_stay_within_theorem_bound() {
        // chain shape guarantees a non-empty left set
        let pool = one_type_pool(10.0, 6);
        let vms = vec![
            vm(0, 0, 10, &[6.0]),
            vm(1, 8, 10, &[6.0]),
            vm(2, 16, 10, &[6.0]),
            vm(3, 24, 10, &[6.0]),
        ];
        let instance = ProblemInstance::new(vec!["u".into()], pool, vms).unwrap();
        let partition = mgc_cluster(instance.vms());
        assert!(!partition.ls.is_empty());
        let out = dcbb_solve(&instance, &DcbbConfig::default()).unwrap();
        let opt = exhaustive_optimal(&instance).unwrap();
        assert!(out.server_count <= opt + partition.ls.len());
        assert!(validate_allocation(&instance, &out.allocation).ok());
    }

    #[test]
    fn merge_reuses_servers_across_clusters() {
        let pool = one_type_pool(10.0, 8);
        // cluster solutions over disjoint request sets, 3 servers each
        let mut a = Allocation::new();
        a.assign(VmId(0), InstanceId(0));
        a.assign(VmId(1), InstanceId(1));
        a.assign(VmId(2), InstanceId(2));
        let mut b = Allocation::new();
        b.assign(VmId(3), InstanceId(4));
        b.assign(VmId(4), InstanceId(5));
        b.assign(VmId(5), InstanceId(7));
        let merged = merge_subsolutions(&[a, b], &pool).unwrap();
        assert_eq!(count_servers(&merged), 3);
    }

    #[test]
    fn single_cluster_merges_to_itself() {
        let pool = one_type_pool(10.0, 4);
        let mut a = Allocation::new();
        a.assign(VmId(0), InstanceId(0));
        a.assign(VmId(1), InstanceId(1));
        let merged = merge_subsolutions(&[a.clone()], &pool).unwrap();
        assert_eq!(merged, a);
    }

    #[test]
    fn merge_counts_types_independently() {
        let types = vec![
            ServerType::new("a", ResourceVector::from_f64s(&[10.0]).unwrap()),
            ServerType::new("b", ResourceVector::from_f64s(&[20.0]).unwrap()),
        ];
        let pool = ServerPool::blocks(types, &[3, 3]).unwrap();
        // cluster 1 uses 2 of type a; cluster 2 uses 2 of type b
        let mut a = Allocation::new();
        a.assign(VmId(0), InstanceId(0));
        a.assign(VmId(1), InstanceId(1));
        let mut b = Allocation::new();
        b.assign(VmId(2), InstanceId(3));
        b.assign(VmId(3), InstanceId(4));
        let merged = merge_subsolutions(&[a, b], &pool).unwrap();
        assert_eq!(count_servers(&merged), 4);
    }

    #[test]
    fn merge_rejects_unknown_instances() {
        let pool = one_type_pool(10.0, 2);
        let mut a = Allocation::new();
        a.assign(VmId(0), InstanceId(9));
        assert!(merge_subsolutions(&[a], &pool).is_err());
    }

    #[test]
    fn outcome_validates_on_random_instances() {
        for seed in 0..15 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = one_type_pool(10.0, 12);
            let n = rng.random_range(3..=12);
            let vms: Vec<VmRequest> = (0..n)
                .map(|i| {
                    vm(
                        i,
                        rng.random_range(0..60),
                        rng.random_range(1..=25),
                        &[rng.random_range(1..=7) as f64],
                    )
                })
                .collect();
            let instance = ProblemInstance::new(vec!["u".into()], pool, vms).unwrap();
            let out = dcbb_solve(&instance, &DcbbConfig::default()).unwrap();
            assert!(
                validate_allocation(&instance, &out.allocation).ok(),
                "seed {seed}"
            );
            assert!(out.incumbent_trace.windows(2).all(|w| w[1].1 <= w[0].1));
        }
    }

    #[test]
    fn budget_is_respected() {
        let instance = separated_groups();
        let config = DcbbConfig {
            total_time_budget: 0.2,
            ..DcbbConfig::default()
        };
        let out = dcbb_solve(&instance, &config).unwrap();
        assert!(out.elapsed <= 0.4);
    }

    #[test]
    fn empty_instance_is_trivial() {
        let instance =
            ProblemInstance::new(vec!["u".into()], one_type_pool(10.0, 1), vec![]).unwrap();
        let out = dcbb_solve(&instance, &DcbbConfig::default()).unwrap();
        assert_eq!(out.server_count, 0);
        assert!(out.proved_optimal);
    }
}
