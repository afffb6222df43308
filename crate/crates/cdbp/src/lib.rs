//! Time-aware virtual machine placement as clairvoyant dynamic bin packing.
//!
//! Every request carries an arrival time and a duration, both known up front,
//! plus a multidimensional resource demand. Servers are heterogeneous. The
//! objective is to host all requests on as few server instances as possible,
//! reusing the same instance for requests whose execution windows do not
//! overlap.
//!
//! The crate ships four solver families behind one problem representation:
//!
//! * [`heuristics`]: first fit and duration-descending first fit, each with an
//!   optional seeded server shuffle (`FF`, `FF+`, `DDFF`, `DDFF+`).
//! * [`bb`]: an exact anytime branch-and-bound with a time limit, plus a
//!   brute-force optimum for small instances.
//! * [`dcbb`]: divide and conquer; cluster requests by window overlap, solve
//!   each cluster with branch-and-bound, place the leftovers with `DDFF+`.
//! * [`oemacs`]: an ant colony system with order-exchange and migration local
//!   search, extended to time-aware multidimensional placement.
//!
//! [`workloads`] generates synthetic request sets and ingests Standard
//! Workload Format traces.

pub mod bb;
pub mod clustering;
pub mod dcbb;
pub mod heuristics;
pub mod model;
pub mod oemacs;
pub mod solve;
pub mod workloads;

pub use model::{
    count_servers, validate_allocation, Allocation, Interval, ModelError, ProblemInstance,
    ReservationTimeline, ResourceAmount, ResourceVector, ServerInstance, ServerPool, ServerType,
    TimePoint, ValidationReport, VmDuration, VmId, VmRequest,
};
pub use solve::{SolveError, SolveOutcome};
