//! The algebraic SDE side of the correspondence.
//!
//! The solution of `x = x₀ + G∗χ(α(x) + β(x)√σ ξ)` is expanded around x₀ into
//! rooted trees whose nodes carry either `χα_j` or `χβ_j√σ ξ`. Products of
//! such trees are then averaged over ξ by pairing the ξ-nodes (Isserlis /
//! Wick); each pair becomes a noise vertex, or a correction vertex with a
//! factor `G(s,s) = 1/2` when the two nodes are parent and child.

mod census;
mod tree;
mod wick;

pub use census::{contraction_pattern_census, CensusRow};
pub use tree::{perturb_solution, unbloom, SolutionSeries, XiTree};
pub use wick::{
    forest_expansion, sde_expectation, sde_expectation_leaves, sde_expectation_route, wick_contract, Route,
    XiDiagram,
};

use sdemsr_diagram::CanonError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdeError {
    #[error("order {order} exceeds the configured bound {bound}")]
    OrderTooLarge { order: u32, bound: u32 },
    #[error("observation slots {a} and {b} carry the same time")]
    CoincidentTimes { a: usize, b: usize },
    #[error("observation slot {0} has no time")]
    UnboundSlot(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("census bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Canon(#[from] CanonError),
}

/// Rejects unbound or coincident observation slots.
pub(crate) fn check_times(slots: &[usize], times: &[f64]) -> Result<(), SdeError> {
    for (i, &a) in slots.iter().enumerate() {
        let ta = *times.get(a).ok_or(SdeError::UnboundSlot(a))?;
        for &b in &slots[i + 1..] {
            let tb = *times.get(b).ok_or(SdeError::UnboundSlot(b))?;
            if a != b && ta == tb {
                return Err(SdeError::CoincidentTimes { a: a.min(b), b: a.max(b) });
            }
        }
    }
    Ok(())
}
