//! Partitioning requests into clustered sets by window overlap.
//!
//! A clustered set (CS) is a group in which every pair of execution windows
//! overlaps; distinct CSs must not overlap at all. Requests that fit neither
//! rule land in the left set (LS). Most-greedy clustering repeatedly stabs
//! the instant covered by the most remaining windows, takes everything alive
//! there as the next CS, and pushes any remaining request that touches that
//! CS into the LS.

use crate::model::{ModelError, TimePoint, VmId, VmRequest};
use std::collections::BTreeSet;

/// The `(SCS, LS)` output of a clustering algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterPartition {
    /// Clustered sets, in extraction order.
    pub scs: Vec<BTreeSet<VmId>>,
    /// Requests not clustered into any CS.
    pub ls: BTreeSet<VmId>,
}

impl ClusterPartition {
    /// CS sizes plus LS size, mostly for diagnostics.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.scs.iter().map(|c| c.len()).collect()
    }
}

fn peak_instant(vms: &[&VmRequest]) -> Option<TimePoint> {
    let mut arrivals: Vec<TimePoint> = vms.iter().map(|v| v.window.start()).collect();
    arrivals.sort_unstable();
    arrivals.dedup();
    let mut best: Option<(TimePoint, usize)> = None;
    for &t in &arrivals {
        let count = vms.iter().filter(|v| v.window.contains(t)).count();
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((t, count));
        }
    }
    best.map(|(t, _)| t)
}

/// An instant at which the most windows are simultaneously active.
///
/// The active count is a right-continuous step function that rises only at
/// arrivals, so scanning arrival instants is exact. Ties break to the
/// smallest instant.
pub fn find_time_most_vms(vms: &[VmRequest]) -> Result<TimePoint, ModelError> {
    let refs: Vec<&VmRequest> = vms.iter().collect();
    peak_instant(&refs).ok_or(ModelError::EmptyInput)
}

/// Most-greedy clustering: peak-instant CS extraction, then LS absorption of
/// every remaining request overlapping the new CS, until nothing remains.
pub fn mgc_cluster(vms: &[VmRequest]) -> ClusterPartition {
    let mut partition = ClusterPartition::default();
    let mut remaining: Vec<&VmRequest> = vms.iter().collect();
    while !remaining.is_empty() {
        let t = peak_instant(&remaining).expect("remaining set is non-empty");
        let (cs, rest): (Vec<&VmRequest>, Vec<&VmRequest>) =
            remaining.into_iter().partition(|v| v.window.contains(t));
        let cs_ids: BTreeSet<VmId> = cs.iter().map(|v| v.id).collect();
        let mut next = Vec::with_capacity(rest.len());
        for vm in rest {
            if cs.iter().any(|c| c.window.overlaps(&vm.window)) {
                partition.ls.insert(vm.id);
            } else {
                next.push(vm);
            }
        }
        partition.scs.push(cs_ids);
        remaining = next;
    }
    partition
}

/// Alternative clustering: grow a CS from the earliest remaining arrival,
/// keeping a running common window, then absorb overlapping leftovers into
/// the LS exactly as most-greedy clustering does.
pub fn sweep_cluster(vms: &[VmRequest]) -> ClusterPartition {
    let mut partition = ClusterPartition::default();
    let mut remaining: Vec<&VmRequest> = vms.iter().collect();
    remaining.sort_by(|a, b| {
        a.window
            .start()
            .cmp(&b.window.start())
            .then(a.id.cmp(&b.id))
    });
    while !remaining.is_empty() {
        let seed = remaining[0];
        let mut common = seed.window;
        let mut cs: Vec<&VmRequest> = vec![seed];
        for vm in remaining.iter().skip(1) {
            if let Some(shrunk) = common.intersection(&vm.window) {
                common = shrunk;
                cs.push(vm);
            }
        }
        let cs_ids: BTreeSet<VmId> = cs.iter().map(|v| v.id).collect();
        let mut next = Vec::with_capacity(remaining.len());
        for vm in remaining.iter().skip(1) {
            if cs_ids.contains(&vm.id) {
                continue;
            }
            if cs.iter().any(|c| c.window.overlaps(&vm.window)) {
                partition.ls.insert(vm.id);
            } else {
                next.push(*vm);
            }
        }
        partition.scs.push(cs_ids);
        remaining = next;
    }
    partition
}

/// True iff the partition covers all requests disjointly, every CS is
/// pairwise overlapping, and no two CSs touch each other.
pub fn verify_partition(vms: &[VmRequest], partition: &ClusterPartition) -> bool {
    let lookup = |id: VmId| vms.iter().find(|v| v.id == id);
    let mut seen: BTreeSet<VmId> = BTreeSet::new();
    for set in partition.scs.iter().chain(std::iter::once(&partition.ls)) {
        for &id in set {
            if lookup(id).is_none() || !seen.insert(id) {
                return false;
            }
        }
    }
    if seen.len() != vms.len() {
        return false;
    }
    // (a) pairwise overlap within each CS
    for cs in &partition.scs {
        let members: Vec<&VmRequest> = cs.iter().filter_map(|&id| lookup(id)).collect();
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                if !a.window.overlaps(&b.window) {
                    return false;
                }
            }
        }
    }
    // (b) no overlap across distinct CSs
    for (i, cs_a) in partition.scs.iter().enumerate() {
        for cs_b in &partition.scs[i + 1..] {
            for &ida in cs_a {
                for &idb in cs_b {
                    let (a, b) = (lookup(ida).unwrap(), lookup(idb).unwrap());
                    if a.window.overlaps(&b.window) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
