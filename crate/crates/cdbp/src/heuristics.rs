//! First-fit solvers: `FF`, `FF+`, `DDFF`, `DDFF+`.
//!
//! All four scan the pool in a fixed order and reserve each request on the
//! first server that can hold it over the whole execution window. The `DD`
//! variants pre-sort requests by descending duration; the `+` variants
//! shuffle the server scan order once with a seeded generator, which tends
//! to help when servers are heterogeneous and no single dimension orders
//! them.

use crate::model::{
    Allocation, ProblemInstance, ReservationTimeline, ServerInstance, ServerPool, VmRequest,
};
use crate::solve::SolveError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeuristicConfig {
    pub shuffle: bool,
    pub sort_by_duration_desc: bool,
    /// Fully determines the shuffle permutation.
    pub rng_seed: u64,
}

impl HeuristicConfig {
    pub fn ff() -> Self {
        Self {
            shuffle: false,
            sort_by_duration_desc: false,
            rng_seed: 0,
        }
    }

    pub fn ff_plus(seed: u64) -> Self {
        Self {
            shuffle: true,
            sort_by_duration_desc: false,
            rng_seed: seed,
        }
    }

    pub fn ddff() -> Self {
        Self {
            sort_by_duration_desc: true,
            ..Self::ff()
        }
    }

    pub fn ddff_plus(seed: u64) -> Self {
        Self {
            sort_by_duration_desc: true,
            ..Self::ff_plus(seed)
        }
    }
}

/// Uniform random permutation of the pool's scan order, deterministic per
/// seed.
pub fn shuffle_pool(pool: &ServerPool, seed: u64) -> Vec<ServerInstance> {
    let mut order = pool.instances().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    order
}

/// Duration-descending request order: unbounded first, ties by id ascending.
pub(crate) fn duration_desc_order<'a>(vms: &'a [VmRequest]) -> Vec<&'a VmRequest> {
    let mut order: Vec<&VmRequest> = vms.iter().collect();
    order.sort_by(|a, b| {
        b.window
            .duration()
            .cmp(&a.window.duration())
            .then(a.id.cmp(&b.id))
    });
    order
}

/// Places `vms` (already ordered) into an existing timeline, scanning
/// `scan_order` first-fit. Used directly by the divide-and-conquer solver to
/// schedule its left set against a pre-populated timeline.
pub(crate) fn place_first_fit(
    timeline: &mut ReservationTimeline,
    scan_order: &[ServerInstance],
    vms: &[&VmRequest],
    allocation: &mut Allocation,
) -> Result<(), SolveError> {
    for vm in vms {
        let mut placed = false;
        for server in scan_order {
            if timeline.can_accommodate(server.id, vm)? {
                timeline.reserve(server.id, vm)?;
                allocation.assign(vm.id, server.id);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(SolveError::InsufficientPool { vm: vm.id });
        }
    }
    Ok(())
}

/// First fit over the configured request and pool orders.
pub fn solve_first_fit(
    instance: &ProblemInstance,
    config: &HeuristicConfig,
) -> Result<Allocation, SolveError> {
    let order: Vec<&VmRequest> = if config.sort_by_duration_desc {
        duration_desc_order(instance.vms())
    } else {
        instance.vms().iter().collect()
    };
    let scan_order = if config.shuffle {
        shuffle_pool(instance.pool(), config.rng_seed)
    } else {
        instance.pool().instances().to_vec()
    };
    let mut timeline = ReservationTimeline::for_pool(instance.pool());
    let mut allocation = Allocation::new();
    place_first_fit(&mut timeline, &scan_order, &order, &mut allocation)?;
    Ok(allocation)
}

/// Duration-descending first fit; the sort is applied regardless of the
/// config flag.
pub fn solve_ddff(
    instance: &ProblemInstance,
    config: &HeuristicConfig,
) -> Result<Allocation, SolveError> {
    let forced = HeuristicConfig {
        sort_by_duration_desc: true,
        ..*config
    };
    solve_first_fit(instance, &forced)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        count_servers, validate_allocation, Interval, ResourceVector, ServerType, VmId,
    };
    use std::collections::BTreeMap;

    fn vm(id: u64, start: u64, secs: u64, demand: &[f64]) -> VmRequest {
        VmRequest::new(
            VmId(id),
            Interval::bounded(start, secs).unwrap(),
            ResourceVector::from_f64s(demand).unwrap(),
        )
    }

    /// Four single-dimension requests where pairs only fit through time
    /// multiplexing: any two demands exceed one server statically.
    fn schematic_requests() -> ProblemInstance {
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

    #[test]
    fn time_multiplexing_reaches_two_servers() {
        let instance = schematic_requests();
        let alloc = solve_first_fit(&instance, &HeuristicConfig::ff()).unwrap();
        assert!(validate_allocation(&instance, &alloc).ok());
        assert_eq!(count_servers(&alloc), 2);
        let ddff = solve_ddff(&instance, &HeuristicConfig::ddff()).unwrap();
        assert!(validate_allocation(&instance, &ddff).ok());
        assert_eq!(count_servers(&ddff), 2);
    }

    #[test]
    fn one_vm_uses_one_server() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[3]).unwrap();
        let instance =
            ProblemInstance::new(vec!["units".into()], pool, vec![vm(0, 0, 5, &[1.0])]).unwrap();
        let alloc = solve_first_fit(&instance, &HeuristicConfig::ff()).unwrap();
        assert_eq!(count_servers(&alloc), 1);
    }

    #[test]
    fn ddff_places_longest_first() {
        let vms = vec![vm(0, 0, 5, &[1.0]), vm(1, 0, 100, &[1.0]), vm(2, 0, 30, &[1.0])];
        let order = duration_desc_order(&vms);
        let ids: Vec<u64> = order.iter().map(|v| v.id.0).collect();
        assert_eq!(ids, vec![1, 2, 0]);
    }

    #[test]
    fn unbounded_sorts_ahead_of_bounded_with_id_ties() {
        let vms = vec![
            vm(3, 0, 50, &[1.0]),
            vm(1, 0, 50, &[1.0]),
            VmRequest::new(
                VmId(2),
                Interval::unbounded(0),
                ResourceVector::from_f64s(&[1.0]).unwrap(),
            ),
        ];
        let ids: Vec<u64> = duration_desc_order(&vms).iter().map(|v| v.id.0).collect();
        assert_eq!(ids, vec![2, 1, 3]);
    }

    #[test]
    fn pool_exhaustion_names_the_first_unplaceable_vm() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[10.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[1]).unwrap();
        let instance = ProblemInstance::new(
            vec!["units".into()],
            pool,
            vec![vm(0, 0, 10, &[6.0]), vm(1, 5, 10, &[6.0])],
        )
        .unwrap();
        assert_eq!(
            solve_first_fit(&instance, &HeuristicConfig::ff()),
            Err(SolveError::InsufficientPool { vm: VmId(1) })
        );
    }

    #[test]
    fn shuffle_is_deterministic_per_seed() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[10]).unwrap();
        assert_eq!(shuffle_pool(&pool, 42), shuffle_pool(&pool, 42));
        assert_ne!(shuffle_pool(&pool, 42), shuffle_pool(&pool, 43));
        let single = ServerPool::blocks(
            vec![ServerType::new(
                "a",
                ResourceVector::from_f64s(&[8.0]).unwrap(),
            )],
            &[1],
        )
        .unwrap();
        assert_eq!(shuffle_pool(&single, 7), single.instances().to_vec());
    }

    #[test]
    fn shuffle_permutations_are_close_to_uniform() {
        let types = vec![ServerType::new(
            "a",
            ResourceVector::from_f64s(&[8.0]).unwrap(),
        )];
        let pool = ServerPool::blocks(types, &[3]).unwrap();
        let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        let trials = 10_000;
        for seed in 0..trials {
            let perm: Vec<u32> = shuffle_pool(&pool, seed).iter().map(|s| s.id.0).collect();
            *counts.entry(perm).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.02, "skewed frequency {freq}");
        }
    }

    #[test]
    fn identical_config_is_bit_stable() {
        let instance = schematic_requests();
        let config = HeuristicConfig::ddff_plus(9);
        let a = solve_ddff(&instance, &config).unwrap();
        let b = solve_ddff(&instance, &config).unwrap();
        assert_eq!(a, b);
    }
}
