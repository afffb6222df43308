use super::{InstanceId, VmId};
use std::collections::{BTreeMap, BTreeSet};

/// A complete placement: every request id mapped to one server instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Allocation {
    assignments: BTreeMap<VmId, InstanceId>,
}

impl Allocation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, vm: VmId, server: InstanceId) {
        self.assignments.insert(vm, server);
    }

    pub fn server_of(&self, vm: VmId) -> Option<InstanceId> {
        self.assignments.get(&vm).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VmId, InstanceId)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Merges another allocation into this one. Ids are expected to be
    /// disjoint; a duplicate keeps the later assignment.
    pub fn extend(&mut self, other: &Allocation) {
        for (vm, server) in other.iter() {
            self.assignments.insert(vm, server);
        }
    }
}

/// Number of distinct server instances the allocation touches.
pub fn count_servers(alloc: &Allocation) -> usize {
    alloc
        .iter()
        .map(|(_, s)| s)
        .collect::<BTreeSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_allocation_uses_no_servers() {
        assert_eq!(count_servers(&Allocation::new()), 0);
    }

    #[test]
    fn counts_distinct_instances() {
        let mut alloc = Allocation::new();
        alloc.assign(VmId(0), InstanceId(3));
        alloc.assign(VmId(1), InstanceId(3));
        alloc.assign(VmId(2), InstanceId(7));
        assert_eq!(count_servers(&alloc), 2);
    }

    #[test]
    fn each_vm_alone_uses_n_servers() {
        let mut alloc = Allocation::new();
        for i in 0..9 {
            alloc.assign(VmId(i), InstanceId(i as u32));
        }
        assert_eq!(count_servers(&alloc), 9);
    }
}
