//! Problem domain: requests, servers, reservation timelines, feasibility and
//! whole-solution validation.
//!
//! Time is integer seconds. A request is active over the half-open span
//! `[arrival, arrival + duration)`, or `[arrival, inf)` for unbounded
//! durations, so back-to-back reservations never contend. Resource amounts
//! are fixed-point values (micro-units), which keeps every capacity
//! comparison exact.

mod allocation;
mod instance;
mod resources;
mod server;
mod time;
mod timeline;
mod validate;

pub use allocation::{count_servers, Allocation};
pub use instance::ProblemInstance;
pub use resources::{ResourceAmount, ResourceVector};
pub use server::{InstanceId, ServerInstance, ServerPool, ServerType};
pub use time::{Interval, TimePoint, VmDuration};
pub use timeline::{ReservationTimeline, ServerTimeline};
pub use validate::{validate_allocation, ValidationReport, Violation};

use thiserror::Error;

/// Contract violations raised by the domain types.
#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("resource vectors have mismatched dimensions: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("resource amount must be finite and non-negative, got {0}")]
    InvalidAmount(f64),
    #[error("bounded durations must be positive")]
    ZeroDuration,
    #[error("reservation does not fit on the target server")]
    InfeasibleReservation,
    #[error("operation requires a non-empty input")]
    EmptyInput,
    #[error("duplicate vm id {0}")]
    DuplicateVmId(VmId),
    #[error("vm {0} is not accommodated by any server type")]
    NoCompatibleServerType(VmId),
    #[error("server type {type_id} has zero capacity in dimension {dimension}, which is used by vm demands")]
    ZeroCapacityDimension { type_id: String, dimension: usize },
    #[error("unknown server instance {0}")]
    UnknownInstance(u32),
    #[error("invalid problem file: {0}")]
    InvalidInstanceFile(String),
    #[error("io error: {0}")]
    Io(String),
}

/// Unique identifier of a request within one problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VmId(pub u64);

impl std::fmt::Display for VmId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A reservation request: execution window plus resource demand.
#[derive(Debug, Clone, PartialEq)]
pub struct VmRequest {
    pub id: VmId,
    pub window: Interval,
    pub demand: ResourceVector,
}

impl VmRequest {
    pub fn new(id: VmId, window: Interval, demand: ResourceVector) -> Self {
        Self { id, window, demand }
    }
}
