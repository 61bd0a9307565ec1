//! k-closure graphs: construction from a DAG, validation of candidate
//! graphs, and the equivalence checks built on top of them.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::graphs::{AncestralViolation, Dag, Mark, MixedGraph, Pmg};
use crate::separation::{self, ConditioningBound, SepQuery};
use crate::vertex_set::VertexSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClosureError {
    #[error("graphs are over different vertex sets")]
    VertexMismatch,
    #[error("k-closures built with different bounds (k={0} vs k={1})")]
    BoundMismatch(usize, usize),
    #[error("input graph is not ancestral")]
    NotAncestral,
}

/// Why a mixed graph is not a k-closure graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClosureViolation {
    NotAncestral(AncestralViolation),
    /// Non-adjacent pair that no set separates.
    NotMaximal { a: usize, b: usize },
    /// Bidirected edge whose endpoints are separated by `witness` once the
    /// edge is removed.
    BidirectedSeparable { a: usize, b: usize, witness: VertexSet },
}

impl ClosureViolation {
    /// Human-readable form using vertex names, e.g.
    /// `BidirectedSeparable(c,d; {u1,u2})`.
    pub fn describe(&self, g: &Pmg) -> String {
        match self {
            ClosureViolation::NotAncestral(AncestralViolation::DirectedCycle(cycle)) => {
                let names: Vec<&str> = cycle.iter().map(|&v| g.name(v)).collect();
                format!("NotAncestral(directed cycle {})", names.join(","))
            }
            ClosureViolation::NotAncestral(AncestralViolation::AlmostDirectedCycle { a, b }) => {
                format!("NotAncestral(almost directed cycle {},{})", g.name(*a), g.name(*b))
            }
            ClosureViolation::NotMaximal { a, b } => format!("NotMaximal({},{})", g.name(*a), g.name(*b)),
            ClosureViolation::BidirectedSeparable { a, b, witness } => format!(
                "BidirectedSeparable({},{}; {{{}}})",
                g.name(*a),
                g.name(*b),
                g.set_names(*witness).join(",")
            ),
        }
    }
}

/// A mixed graph together with the bound it is a k-closure for.
#[derive(Clone, PartialEq, Eq)]
pub struct KClosure {
    graph: MixedGraph,
    bound: ConditioningBound,
}

impl KClosure {
    /// Wraps a graph after checking the k-closure characterization.
    pub fn validated(graph: MixedGraph, bound: ConditioningBound) -> Result<Self, ClosureViolation> {
        let bound = ConditioningBound::new(bound.effective(graph.n()));
        is_valid_k_closure(&graph, bound)?;
        Ok(KClosure { graph, bound })
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn into_graph(self) -> MixedGraph {
        self.graph
    }

    pub fn bound(&self) -> ConditioningBound {
        self.bound
    }
}

impl fmt::Debug for KClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KClosure(k={}) {:?}", self.bound.k(), self.graph)
    }
}

/// The k-closure of `d`: every non-adjacent k-covered pair gains `a -> b`
/// if `a` is an ancestor of `b`, `a <- b` for the converse, and `a <-> b`
/// otherwise. Edges of `d` are kept as they are.
pub fn construct_k_closure(d: &Dag, bound: ConditioningBound) -> KClosure {
    let n = d.n();
    let bound = bound.clamp(n);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !d.adjacent(a, b))
        .collect();
    let covered: Vec<(usize, usize)> = pairs
        .into_par_iter()
        .filter(|&(a, b)| separation::is_k_covered(d, a, b, bound))
        .collect();

    let mut g = d.as_pmg().clone();
    for (a, b) in covered {
        if d.ancestors(b).contains(a) {
            g.set_edge(a, b, Mark::Tail, Mark::Arrow);
        } else if d.ancestors(a).contains(b) {
            g.set_edge(a, b, Mark::Arrow, Mark::Tail);
        } else {
            g.set_edge(a, b, Mark::Arrow, Mark::Arrow);
        }
    }
    KClosure {
        graph: MixedGraph::from_pmg(g).expect("closure edges are directed or bidirected"),
        bound,
    }
}

/// Some set separating the non-adjacent pair `a, b`, trying the ancestral
/// set `An({a,b}) \ {a,b}` before the exhaustive search.
fn any_separator(g: &MixedGraph, a: usize, b: usize) -> Option<VertexSet> {
    let anc = g
        .ancestors_of_set(VertexSet::singleton(a).with(b))
        .without(a)
        .without(b);
    if separation::is_separated(g, a, b, anc) {
        return Some(anc);
    }
    separation::find_any_sepset(g, a, b)
}

/// First non-adjacent pair that cannot be separated, if any.
pub fn maximality_violation(g: &MixedGraph) -> Option<(usize, usize)> {
    let n = g.n();
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .find(|&(a, b)| !g.adjacent(a, b) && any_separator(g, a, b).is_none())
}

/// Checks that `g` is a k-closure graph: ancestral, maximal, and every
/// bidirected edge joins a pair that no set of size at most `k` separates
/// once that edge is removed.
pub fn is_valid_k_closure(g: &MixedGraph, bound: ConditioningBound) -> Result<(), ClosureViolation> {
    if let Some(v) = g.ancestral_violation() {
        return Err(ClosureViolation::NotAncestral(v));
    }
    if let Some((a, b)) = maximality_violation(g) {
        return Err(ClosureViolation::NotMaximal { a, b });
    }
    let bound = ConditioningBound::new(bound.effective(g.n()));
    for (a, b) in g.bidirected_edges() {
        let pruned = g.without_edge(a, b);
        if let separation::SepsetEntry::Found(witness) =
            separation::find_sepset_upto_k(&pruned, a, b, bound, separation::SearchScope::AllSubsets)
        {
            return Err(ClosureViolation::BidirectedSeparable { a, b, witness });
        }
    }
    Ok(())
}

/// Markov equivalence of two MAGs: same skeleton, same unshielded colliders,
/// and the same collider status of `Y` on every path that discriminates `Y`
/// in both graphs.
pub fn mag_markov_equivalent(m1: &MixedGraph, m2: &MixedGraph) -> Result<bool, ClosureError> {
    if !m1.same_vertices(m2) {
        return Err(ClosureError::VertexMismatch);
    }
    if !m1.is_ancestral() || !m2.is_ancestral() {
        return Err(ClosureError::NotAncestral);
    }
    if m1.skeleton() != m2.skeleton() || m1.unshielded_colliders() != m2.unshielded_colliders() {
        return Ok(false);
    }
    for (x, y) in [(m1, m2), (m2, m1)] {
        for p in x.discriminating_paths() {
            if p.holds_in(y) && p.y_is_collider(x) != p.y_is_collider(y) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Markov equivalence of two k-closures: same skeleton and same unshielded
/// colliders. Discriminating paths never separate two k-closures.
pub fn kclosure_equivalent(k1: &KClosure, k2: &KClosure) -> Result<bool, ClosureError> {
    if !k1.graph.same_vertices(&k2.graph) {
        return Err(ClosureError::VertexMismatch);
    }
    if k1.bound != k2.bound {
        return Err(ClosureError::BoundMismatch(k1.bound.k(), k2.bound.k()));
    }
    Ok(same_skeleton_and_colliders(k1.graph.as_pmg(), k2.graph.as_pmg()))
}

pub(crate) fn same_skeleton_and_colliders(g1: &Pmg, g2: &Pmg) -> bool {
    g1.skeleton() == g2.skeleton() && g1.unshielded_colliders() == g2.unshielded_colliders()
}

/// k-Markov equivalence of two DAGs through their k-closures.
pub fn k_markov_equivalent(d1: &Dag, d2: &Dag, bound: ConditioningBound) -> Result<bool, ClosureError> {
    if !d1.same_vertices(d2) {
        return Err(ClosureError::VertexMismatch);
    }
    kclosure_equivalent(&construct_k_closure(d1, bound), &construct_k_closure(d2, bound))
}

/// First degree-k separation statement on which the DAGs disagree, by
/// exhaustive comparison.
pub fn k_markov_witness(d1: &Dag, d2: &Dag, bound: ConditioningBound) -> Result<Option<SepQuery>, ClosureError> {
    if !d1.same_vertices(d2) {
        return Err(ClosureError::VertexMismatch);
    }
    Ok(separation::first_disagreement(d1, d2, bound.effective(d1.n())))
}

/// k-Markov equivalence straight from the definition: every statement with
/// a conditioning set of size at most `k` is compared.
pub fn k_markov_equivalent_direct(d1: &Dag, d2: &Dag, bound: ConditioningBound) -> Result<bool, ClosureError> {
    Ok(k_markov_witness(d1, d2, bound)?.is_none())
}

/// Classical Markov equivalence of DAGs: same skeleton and same unshielded colliders.
pub fn markov_equivalent_dags(d1: &Dag, d2: &Dag) -> Result<bool, ClosureError> {
    if !d1.same_vertices(d2) {
        return Err(ClosureError::VertexMismatch);
    }
    Ok(same_skeleton_and_colliders(d1, d2))
}
