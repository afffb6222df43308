//! Shared solver contract: outcome shape and failure modes.

use crate::model::{Allocation, ModelError, VmId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    /// The finite pool cannot host some request on any branch.
    #[error("insufficient pool: no server can host vm {vm}")]
    InsufficientPool { vm: VmId },
    /// Exhaustive search established that no total assignment exists.
    #[error("instance is infeasible for the given pool")]
    Infeasible,
    /// The time budget expired before any complete solution was found.
    #[error("no feasible solution found within the time budget")]
    NoSolutionWithinBudget,
    /// Input sizes exceed a guard on an intentionally exponential routine.
    #[error("guard violation: {0}")]
    GuardViolation(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Result of a search-based solver run.
///
/// `incumbent_trace` records `(elapsed seconds, server count)` every time the
/// best known complete solution improved. Entries are non-increasing in
/// count and the last entry matches `allocation`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub allocation: Allocation,
    pub server_count: usize,
    pub proved_optimal: bool,
    pub elapsed: f64,
    pub incumbent_trace: Vec<(f64, usize)>,
}

impl SolveOutcome {
    pub(crate) fn new(
        allocation: Allocation,
        proved_optimal: bool,
        elapsed: f64,
        incumbent_trace: Vec<(f64, usize)>,
    ) -> Self {
        let server_count = crate::model::count_servers(&allocation);
        debug_assert!(incumbent_trace.windows(2).all(|w| w[1].1 <= w[0].1));
        debug_assert_eq!(
            incumbent_trace.last().map(|&(_, c)| c),
            Some(server_count).filter(|_| !incumbent_trace.is_empty())
        );
        Self {
            allocation,
            server_count,
            proved_optimal,
            elapsed,
            incumbent_trace,
        }
    }
}
