use serde::{Deserialize, Serialize};

use crate::graphs::{Mark, Pmg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    /// Unshielded-collider orientation.
    UC,
    R1,
    R2,
    R3,
    /// Discriminating-path rule.
    R4,
    R8,
    R9,
    R10,
    R11,
    R12,
}

/// One endpoint mark set by the orientation engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleEvent {
    pub rule: RuleId,
    /// Endpoint whose mark changed.
    pub at: usize,
    /// Other end of the edge.
    pub other: usize,
    pub mark: Mark,
    /// Vertices of the matched pattern (triple, path or neighbour sets).
    pub witness: Vec<usize>,
}

/// Re-applies `trace` to the skeleton graph produced by the search phase.
pub fn replay(skeleton: &Pmg, trace: &[RuleEvent]) -> Pmg {
    let mut g = skeleton.clone();
    for e in trace {
        g.set_mark(e.at, e.other, e.mark);
    }
    g
}
