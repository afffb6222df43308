use super::{Interval, ModelError, ResourceVector, ServerPool, TimePoint, VmRequest};
use crate::model::InstanceId;

/// Reserved load on one server: a set of `(window, demand)` entries.
///
/// Usage per dimension is a step function that only rises at entry starts, so
/// feasibility over a window is decided exactly by checking the window start
/// and the starts of overlapping entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerTimeline {
    capacity: ResourceVector,
    entries: Vec<(Interval, ResourceVector)>,
}

impl ServerTimeline {
    pub fn new(capacity: ResourceVector) -> Self {
        Self {
            capacity,
            entries: Vec::new(),
        }
    }

    pub fn capacity(&self) -> &ResourceVector {
        &self.capacity
    }

    pub fn entries(&self) -> &[(Interval, ResourceVector)] {
        &self.entries
    }

    pub fn is_used(&self) -> bool {
        !self.entries.is_empty()
    }

    /// True iff adding `vm` keeps usage within capacity in every dimension at
    /// every instant of its window.
    pub fn can_accommodate(&self, vm: &VmRequest) -> Result<bool, ModelError> {
        if vm.demand.len() != self.capacity.len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.capacity.len(),
                got: vm.demand.len(),
            });
        }
        Ok(fits_at_event_points(
            &self.entries,
            &self.capacity,
            &vm.window,
            &vm.demand,
        ))
    }

    /// Adds the reservation. Callers must have established feasibility;
    /// reserving an infeasible request is a contract violation.
    pub fn reserve(&mut self, vm: &VmRequest) -> Result<(), ModelError> {
        if !self.can_accommodate(vm)? {
            return Err(ModelError::InfeasibleReservation);
        }
        self.entries.push((vm.window, vm.demand.clone()));
        Ok(())
    }

    pub fn usage_at(&self, t: TimePoint) -> ResourceVector {
        let mut usage = ResourceVector::zeros(self.capacity.len());
        for (window, demand) in &self.entries {
            if window.contains(t) {
                usage.add_assign(demand);
            }
        }
        usage
    }
}

/// Whether `demand` fits alongside `entries` under `capacity` throughout
/// `window`, checked at event points only.
pub(crate) fn fits_at_event_points(
    entries: &[(Interval, ResourceVector)],
    capacity: &ResourceVector,
    window: &Interval,
    demand: &ResourceVector,
) -> bool {
    let dims = capacity.len();
    if !demand.fits_within(capacity) {
        return false;
    }
    let mut scratch: Vec<i64> = vec![0; dims];
    let mut check = |t: TimePoint| -> bool {
        for (d, slot) in scratch.iter_mut().enumerate() {
            *slot = demand.get(d).micros();
        }
        for (entry_window, entry_demand) in entries {
            if entry_window.contains(t) {
                for (d, slot) in scratch.iter_mut().enumerate() {
                    *slot += entry_demand.get(d).micros();
                }
            }
        }
        scratch
            .iter()
            .enumerate()
            .all(|(d, &used)| used <= capacity.get(d).micros())
    };
    if !check(window.start()) {
        return false;
    }
    for (entry_window, _) in entries {
        let s = entry_window.start();
        if s > window.start() && window.contains(s) && !check(s) {
            return false;
        }
    }
    true
}

/// Per-server reservation state for a whole pool, indexed by instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservationTimeline {
    servers: Vec<ServerTimeline>,
}

impl ReservationTimeline {
    pub fn for_pool(pool: &ServerPool) -> Self {
        let servers = pool
            .instances()
            .iter()
            .map(|inst| ServerTimeline::new(pool.types()[inst.type_index].capacity.clone()))
            .collect();
        Self { servers }
    }

    pub fn server(&self, id: InstanceId) -> Result<&ServerTimeline, ModelError> {
        self.servers
            .get(id.0 as usize)
            .ok_or(ModelError::UnknownInstance(id.0))
    }

    pub fn can_accommodate(&self, id: InstanceId, vm: &VmRequest) -> Result<bool, ModelError> {
        self.server(id)?.can_accommodate(vm)
    }

    pub fn reserve(&mut self, id: InstanceId, vm: &VmRequest) -> Result<(), ModelError> {
        self.servers
            .get_mut(id.0 as usize)
            .ok_or(ModelError::UnknownInstance(id.0))?
            .reserve(vm)
    }

    pub fn used_instances(&self) -> impl Iterator<Item = InstanceId> + '_ {
        self.servers
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_used())
            .map(|(i, _)| InstanceId(i as u32))
    }
}
