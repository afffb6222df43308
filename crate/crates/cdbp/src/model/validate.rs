use super::{
    Allocation, InstanceId, ProblemInstance, ResourceAmount, ResourceVector, TimePoint, VmId,
};
use std::collections::BTreeSet;

/// One way an allocation can break the problem constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A request the allocation does not place anywhere.
    Unassigned { vm: VmId },
    /// An assignment for an id the instance does not contain.
    UnknownVm { vm: VmId },
    /// An assignment onto a server instance outside the pool.
    UnknownServer { vm: VmId, server: InstanceId },
    /// Aggregate demand exceeds capacity on a server at some instant.
    CapacityExceeded {
        server: InstanceId,
        at: TimePoint,
        dimension: usize,
        overload: ResourceAmount,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Unassigned { vm } => write!(f, "vm {vm} is unassigned"),
            Violation::UnknownVm { vm } => write!(f, "vm {vm} is not part of the instance"),
            Violation::UnknownServer { vm, server } => {
                write!(f, "vm {vm} assigned to unknown server {server}")
            }
            Violation::CapacityExceeded {
                server,
                at,
                dimension,
                overload,
            } => write!(
                f,
                "server {server} over capacity at t={at} in dimension {dimension} by {overload}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks an allocation against the instance: total assignment and capacity
/// respected on every server at every instant. Capacity is evaluated at each
/// assigned request's arrival, which is exact for step-function usage.
pub fn validate_allocation(instance: &ProblemInstance, alloc: &Allocation) -> ValidationReport {
    let mut report = ValidationReport::default();
    let known_ids: BTreeSet<VmId> = instance.vms().iter().map(|v| v.id).collect();

    for vm in instance.vms() {
        if alloc.server_of(vm.id).is_none() {
            report.violations.push(Violation::Unassigned { vm: vm.id });
        }
    }
    for (vm_id, server) in alloc.iter() {
        if !known_ids.contains(&vm_id) {
            report.violations.push(Violation::UnknownVm { vm: vm_id });
        } else if instance.pool().instance(server).is_err() {
            report.violations.push(Violation::UnknownServer {
                vm: vm_id,
                server,
            });
        }
    }

    // Group assigned requests per server, then sweep arrival events.
    let mut per_server: Vec<Vec<&super::VmRequest>> = vec![Vec::new(); instance.pool().len()];
    for vm in instance.vms() {
        if let Some(server) = alloc.server_of(vm.id) {
            if let Some(slot) = per_server.get_mut(server.0 as usize) {
                slot.push(vm);
            }
        }
    }
    for (idx, vms) in per_server.iter().enumerate() {
        if vms.is_empty() {
            continue;
        }
        let server = InstanceId(idx as u32);
        let capacity = instance
            .pool()
            .capacity_of(server)
            .expect("index within pool");
        let mut events: Vec<TimePoint> = vms.iter().map(|v| v.window.start()).collect();
        events.sort_unstable();
        events.dedup();
        for &t in &events {
            let mut usage = ResourceVector::zeros(capacity.len());
            for vm in vms {
                if vm.window.contains(t) {
                    usage.add_assign(&vm.demand);
                }
            }
            for d in 0..capacity.len() {
                let over = usage.get(d).micros() - capacity.get(d).micros();
                if over > 0 {
                    report.violations.push(Violation::CapacityExceeded {
                        server,
                        at: t,
                        dimension: d,
                        overload: ResourceAmount::from_micros(over),
                    });
                }
            }
        }
    }
    report
}
