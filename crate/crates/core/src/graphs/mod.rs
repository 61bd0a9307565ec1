//! Graph types shared by every other module.
//!
//! All three graph kinds use the same storage: for each vertex `v`, three
//! bitsets record which neighbours `u` put an arrowhead, a tail or a circle
//! at `v` on the edge `u – v`. A pair is adjacent iff it appears in exactly
//! one of the three sets of each endpoint. [`MixedGraph`] and [`Dag`] are
//! validated wrappers around [`Pmg`] and dereference to it, so every
//! structural query is written once.

mod paths;
mod text;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

use crate::vertex_set::{VertexSet, MAX_VERTICES};

pub use paths::DiscriminatingPath;
pub use text::parse_graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has {0} vertices, at most {MAX_VERTICES} are supported")]
    TooManyVertices(usize),
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge between `{0}` and `{1}`")]
    DuplicateEdge(String, String),
    #[error("edge `{0}` – `{1}` carries a circle mark, not allowed in a mixed graph")]
    CircleMark(String, String),
    #[error("edge `{0}` – `{1}` is undirected, not allowed in a mixed graph")]
    UndirectedEdge(String, String),
    #[error("edge `{0}` <-> `{1}` is bidirected, not allowed in a DAG")]
    BidirectedEdge(String, String),
    #[error("directed cycle through {0:?}")]
    Cyclic(Vec<String>),
    #[error("graphs are over different vertex sets")]
    VertexMismatch,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Endpoint mark of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

/// Attempted rewrite of an endpoint mark that already left `Circle`.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("mark at {at} on edge with {other} is {current:?}, refusing to set {requested:?}")]
pub struct MarkConflict {
    pub at: usize,
    pub other: usize,
    pub current: Mark,
    pub requested: Mark,
}

/// Partial mixed graph: every endpoint mark is a tail, an arrowhead or a circle.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Pmg {
    names: Arc<[String]>,
    arrow: Vec<VertexSet>,
    tail: Vec<VertexSet>,
    circle: Vec<VertexSet>,
}

impl Pmg {
    /// Graph without edges over the given vertex names.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, GraphError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_VERTICES {
            return Err(GraphError::TooManyVertices(names.len()));
        }
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(GraphError::DuplicateVertex(name.clone()));
            }
        }
        Ok(Self::with_names(names.into()))
    }

    /// Graph without edges sharing an already validated name table.
    pub fn with_names(names: Arc<[String]>) -> Self {
        let n = names.len();
        Pmg {
            names,
            arrow: vec![VertexSet::EMPTY; n],
            tail: vec![VertexSet::EMPTY; n],
            circle: vec![VertexSet::EMPTY; n],
        }
    }

    /// Complete graph with `o-o` on every pair.
    pub fn complete_circle(names: Arc<[String]>) -> Self {
        let mut g = Self::with_names(names);
        let n = g.n();
        for v in 0..n {
            g.circle[v] = VertexSet::full(n).without(v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &Arc<[String]> {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn vertex(&self, name: &str) -> Result<usize, GraphError> {
        self.index_of(name)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n())
    }

    /// Names of a vertex set, in index order.
    pub fn set_names(&self, s: VertexSet) -> Vec<&str> {
        s.iter().map(|v| self.name(v)).collect()
    }

    pub fn same_vertices(&self, other: &Pmg) -> bool {
        self.names == other.names
    }

    /// PMG inclusion `self ⊆ other`: same adjacencies, and every tail and
    /// every arrowhead of `other` sits at the same endpoint in `self`.
    /// Circles of `self` are therefore circles of `other`.
    pub fn is_subset_of(&self, other: &Pmg) -> bool {
        self.same_vertices(other)
            && (0..self.n()).all(|v| {
                self.neighbors(v) == other.neighbors(v)
                    && other.tail[v].is_subset(self.tail[v])
                    && other.arrow[v].is_subset(self.arrow[v])
            })
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.arrow[v].union(self.tail[v]).union(self.circle[v])
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.neighbors(v).contains(u)
    }

    /// Mark at `at` on the edge `at – other`, if the edge exists.
    pub fn mark(&self, at: usize, other: usize) -> Option<Mark> {
        if self.arrow[at].contains(other) {
            Some(Mark::Arrow)
        } else if self.tail[at].contains(other) {
            Some(Mark::Tail)
        } else if self.circle[at].contains(other) {
            Some(Mark::Circle)
        } else {
            None
        }
    }

    /// Marks `(at u, at v)` of the edge `u – v`.
    pub fn edge(&self, u: usize, v: usize) -> Option<(Mark, Mark)> {
        Some((self.mark(u, v)?, self.mark(v, u)?))
    }

    /// Neighbours whose edge carries an arrowhead at `v`.
    pub fn arrows_at(&self, v: usize) -> VertexSet {
        self.arrow[v]
    }

    pub fn tails_at(&self, v: usize) -> VertexSet {
        self.tail[v]
    }

    pub fn circles_at(&self, v: usize) -> VertexSet {
        self.circle[v]
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        let n = self.n();
        if u >= n {
            return Err(GraphError::VertexOutOfRange(u));
        }
        if v >= n {
            return Err(GraphError::VertexOutOfRange(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(self.name(u).to_string()));
        }
        Ok(())
    }

    /// Adds the edge `u – v`; fails on self-loops and on an existing edge.
    pub fn add_edge(&mut self, u: usize, v: usize, at_u: Mark, at_v: Mark) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        if self.adjacent(u, v) {
            return Err(GraphError::DuplicateEdge(
                self.name(u).to_string(),
                self.name(v).to_string(),
            ));
        }
        self.put(v, u, at_v);
        self.put(u, v, at_u);
        Ok(())
    }

    /// Inserts or replaces the edge `u – v`.
    pub fn set_edge(&mut self, u: usize, v: usize, at_u: Mark, at_v: Mark) {
        assert_ne!(u, v, "self-loop");
        self.remove_edge(u, v);
        self.put(u, v, at_u);
        self.put(v, u, at_v);
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) {
        for sets in [&mut self.arrow, &mut self.tail, &mut self.circle] {
            sets[u].remove(v);
            sets[v].remove(u);
        }
    }

    fn put(&mut self, at: usize, other: usize, mark: Mark) {
        self.arrow[at].remove(other);
        self.tail[at].remove(other);
        self.circle[at].remove(other);
        match mark {
            Mark::Arrow => self.arrow[at].insert(other),
            Mark::Tail => self.tail[at].insert(other),
            Mark::Circle => self.circle[at].insert(other),
        }
    }

    /// Overwrites the mark at `at` on an existing edge.
    pub fn set_mark(&mut self, at: usize, other: usize, mark: Mark) {
        assert!(self.adjacent(at, other), "set_mark on a missing edge");
        self.put(at, other, mark);
    }

    /// Sets the mark at `at` only if it is currently a circle.
    ///
    /// Returns `Ok(true)` when the mark changed, `Ok(false)` when it already
    /// equals `mark`, and an error when it holds a different non-circle mark.
    pub fn refine_mark(&mut self, at: usize, other: usize, mark: Mark) -> Result<bool, MarkConflict> {
        let current = self.mark(at, other).expect("refine_mark on a missing edge");
        if current == mark {
            Ok(false)
        } else if current == Mark::Circle {
            self.put(at, other, mark);
            Ok(true)
        } else {
            Err(MarkConflict {
                at,
                other,
                current,
                requested: mark,
            })
        }
    }

    /// All edges as `(u, v, mark at u, mark at v)` with `u < v`, in pair order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Mark, Mark)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v, self.mark(u, v).unwrap(), self.mark(v, u).unwrap()))
        })
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n()).map(|v| self.neighbors(v).len()).sum::<usize>() / 2
    }

    /// Unordered adjacent pairs `(u, v)` with `u < v`.
    pub fn skeleton(&self) -> BTreeSet<(usize, usize)> {
        self.edges().map(|(u, v, _, _)| (u, v)).collect()
    }

    /// Triples `(a, c, b)` with `a < b`, `a` and `b` non-adjacent, and both
    /// edges carrying an arrowhead at `c`.
    pub fn unshielded_colliders(&self) -> BTreeSet<(usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for c in 0..self.n() {
            let into = self.arrow[c];
            for a in into {
                for b in into.iter().filter(|&b| b > a) {
                    if !self.adjacent(a, b) {
                        out.insert((a, c, b));
                    }
                }
            }
        }
        out
    }

    /// Vertices `u` with a directed edge `u -> v`.
    pub fn parents(&self, v: usize) -> VertexSet {
        self.arrow[v].iter().filter(|&u| self.tail[u].contains(v)).collect()
    }

    /// Vertices `u` with a directed edge `v -> u`.
    pub fn children(&self, v: usize) -> VertexSet {
        self.tail[v].iter().filter(|&u| self.arrow[u].contains(v)).collect()
    }

    /// Vertices `u` with `u <-> v`.
    pub fn spouses(&self, v: usize) -> VertexSet {
        self.arrow[v].iter().filter(|&u| self.arrow[u].contains(v)).collect()
    }

    /// Proper ancestors of `x` along directed (`->`) edges; `x` itself is excluded.
    pub fn ancestors(&self, x: usize) -> VertexSet {
        self.ancestors_of_set(VertexSet::singleton(x)).without(x)
    }

    /// Union of the seeds and all their ancestors.
    pub fn ancestors_of_set(&self, seeds: VertexSet) -> VertexSet {
        let mut seen = seeds;
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            for p in self.parents(v) {
                if !seen.contains(p) {
                    seen.insert(p);
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Proper descendants of `x` along directed edges.
    pub fn descendants(&self, x: usize) -> VertexSet {
        let mut seen = VertexSet::singleton(x);
        let mut stack = vec![x];
        while let Some(v) = stack.pop() {
            for c in self.children(v) {
                if !seen.contains(c) {
                    seen.insert(c);
                    stack.push(c);
                }
            }
        }
        seen.without(x)
    }

    /// A directed cycle, if the directed part of the graph has one.
    pub fn directed_cycle(&self) -> Option<Vec<usize>> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let n = self.n();
        let mut state = vec![0u8; n];
        let mut stack_path = Vec::new();
        fn visit(g: &Pmg, v: usize, state: &mut [u8], path: &mut Vec<usize>) -> Option<Vec<usize>> {
            state[v] = 1;
            path.push(v);
            for c in g.children(v) {
                if state[c] == 1 {
                    let start = path.iter().position(|&x| x == c).unwrap();
                    return Some(path[start..].to_vec());
                }
                if state[c] == 0 {
                    if let Some(cycle) = visit(g, c, state, path) {
                        return Some(cycle);
                    }
                }
            }
            path.pop();
            state[v] = 2;
            None
        }
        for v in 0..n {
            if state[v] == 0 {
                if let Some(cycle) = visit(self, v, &mut state, &mut stack_path) {
                    return Some(cycle);
                }
            }
        }
        None
    }

    /// Topological order of the directed part, `None` if it is cyclic.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents(v).len()).collect();
        let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Discriminating paths for every triple, see [`DiscriminatingPath`].
    pub fn discriminating_paths(&self) -> Vec<DiscriminatingPath> {
        paths::discriminating_paths(self)
    }

    /// Same graph with the vertex set relabelled by a permutation of indices
    /// (`perm[old] = new`); names move with their vertices.
    pub fn permuted(&self, perm: &[usize]) -> Pmg {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let mut names = vec![String::new(); n];
        for (old, &new) in perm.iter().enumerate() {
            names[new] = self.names[old].clone();
        }
        let mut g = Pmg::with_names(names.into());
        for (u, v, mu, mv) in self.edges() {
            g.set_edge(perm[u], perm[v], mu, mv);
        }
        g
    }
}

impl fmt::Debug for Pmg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pmg {{ ")?;
        for (i, (u, v, mu, mv)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} {} {}", self.name(u), text::glyph(mu, mv), self.name(v))?;
        }
        write!(f, " }}")
    }
}

/// Violation of ancestrality, with a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AncestralViolation {
    DirectedCycle(Vec<usize>),
    /// `a <-> b` together with a directed path `a => b`.
    AlmostDirectedCycle { a: usize, b: usize },
}

/// Graph whose edges are `->` or `<->`: k-closures and MAGs live here.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MixedGraph(Pmg);

impl MixedGraph {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, GraphError> {
        Ok(MixedGraph(Pmg::new(names)?))
    }

    pub fn with_names(names: Arc<[String]>) -> Self {
        MixedGraph(Pmg::with_names(names))
    }

    /// Accepts a PMG whose edges are all directed or bidirected.
    pub fn from_pmg(g: Pmg) -> Result<Self, GraphError> {
        for (u, v, mu, mv) in g.edges() {
            let names = || (g.name(u).to_string(), g.name(v).to_string());
            if mu == Mark::Circle || mv == Mark::Circle {
                let (a, b) = names();
                return Err(GraphError::CircleMark(a, b));
            }
            if mu == Mark::Tail && mv == Mark::Tail {
                let (a, b) = names();
                return Err(GraphError::UndirectedEdge(a, b));
            }
        }
        Ok(MixedGraph(g))
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.0.add_edge(from, to, Mark::Tail, Mark::Arrow)
    }

    pub fn add_bidirected(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.0.add_edge(u, v, Mark::Arrow, Mark::Arrow)
    }

    pub fn as_pmg(&self) -> &Pmg {
        &self.0
    }

    pub fn into_pmg(self) -> Pmg {
        self.0
    }

    /// Copy of the graph with the edge `u – v` removed.
    pub fn without_edge(&self, u: usize, v: usize) -> MixedGraph {
        let mut g = self.0.clone();
        g.remove_edge(u, v);
        MixedGraph(g)
    }

    /// Bidirected edges `(u, v)` with `u < v`.
    pub fn bidirected_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .filter(|&(_, _, mu, mv)| mu == Mark::Arrow && mv == Mark::Arrow)
            .map(|(u, v, _, _)| (u, v))
            .collect()
    }

    pub fn ancestral_violation(&self) -> Option<AncestralViolation> {
        if let Some(cycle) = self.directed_cycle() {
            return Some(AncestralViolation::DirectedCycle(cycle));
        }
        for (a, b) in self.bidirected_edges() {
            if self.ancestors(b).contains(a) {
                return Some(AncestralViolation::AlmostDirectedCycle { a, b });
            }
            if self.ancestors(a).contains(b) {
                return Some(AncestralViolation::AlmostDirectedCycle { a: b, b: a });
            }
        }
        None
    }

    /// No directed cycle and no bidirected edge between an ancestor pair.
    pub fn is_ancestral(&self) -> bool {
        self.ancestral_violation().is_none()
    }

    /// The DAG left after deleting every bidirected edge.
    pub fn directed_part(&self) -> Result<Dag, GraphError> {
        let mut g = self.0.clone();
        for (u, v) in self.bidirected_edges() {
            g.remove_edge(u, v);
        }
        Dag::from_pmg(g)
    }
}

impl Deref for MixedGraph {
    type Target = Pmg;

    fn deref(&self) -> &Pmg {
        &self.0
    }
}

impl fmt::Debug for MixedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Directed acyclic graph.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dag(MixedGraph);

impl Dag {
    /// Builds a DAG from `(parent, child)` index pairs.
    pub fn from_edges<S: Into<String>>(
        names: impl IntoIterator<Item = S>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let mut g = Pmg::new(names)?;
        for &(u, v) in edges {
            g.add_edge(u, v, Mark::Tail, Mark::Arrow)?;
        }
        Dag::from_pmg(g)
    }

    /// Builds a DAG from `(parent, child)` name pairs.
    pub fn from_named_edges(names: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let mut g = Pmg::new(names.iter().copied())?;
        for &(u, v) in edges {
            let (u, v) = (g.vertex(u)?, g.vertex(v)?);
            g.add_edge(u, v, Mark::Tail, Mark::Arrow)?;
        }
        Dag::from_pmg(g)
    }

    /// Builds a DAG where bit `u` of `parent_masks[v]` encodes `u -> v`.
    pub fn from_parent_masks(names: Arc<[String]>, parent_masks: &[u64]) -> Result<Self, GraphError> {
        let mut g = Pmg::with_names(names);
        assert_eq!(parent_masks.len(), g.n());
        for (v, &mask) in parent_masks.iter().enumerate() {
            for u in VertexSet::from_bits(mask) {
                g.add_edge(u, v, Mark::Tail, Mark::Arrow)?;
            }
        }
        Dag::from_pmg(g)
    }

    pub fn from_pmg(g: Pmg) -> Result<Self, GraphError> {
        let mixed = MixedGraph::from_pmg(g)?;
        if let Some((u, v)) = mixed.bidirected_edges().first().copied() {
            return Err(GraphError::BidirectedEdge(
                mixed.name(u).to_string(),
                mixed.name(v).to_string(),
            ));
        }
        if let Some(cycle) = mixed.directed_cycle() {
            return Err(GraphError::Cyclic(
                cycle.iter().map(|&v| mixed.name(v).to_string()).collect(),
            ));
        }
        Ok(Dag(mixed))
    }

    pub fn as_mixed(&self) -> &MixedGraph {
        &self.0
    }

    pub fn into_mixed(self) -> MixedGraph {
        self.0
    }

    pub fn as_pmg(&self) -> &Pmg {
        &self.0 .0
    }

    /// Topological order, ties broken by index.
    pub fn topo_order(&self) -> Vec<usize> {
        self.topological_order().expect("DAG invariant")
    }

    /// Directed edges `(parent, child)` in pair order.
    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .map(|(u, v, mu, _)| if mu == Mark::Tail { (u, v) } else { (v, u) })
            .collect()
    }

    pub fn parent_masks(&self) -> Vec<u64> {
        (0..self.n()).map(|v| self.parents(v).bits()).collect()
    }
}

impl Deref for Dag {
    type Target = MixedGraph;

    fn deref(&self) -> &MixedGraph {
        &self.0
    }
}

impl fmt::Debug for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(g: &Pmg, names: &[&str]) -> VertexSet {
        names.iter().map(|n| g.vertex(n).unwrap()).collect()
    }

    #[test]
    fn ancestors_fig2_d1() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("b", "c"), ("d", "c"), ("d", "a")]).unwrap();
        let c = d.vertex("c").unwrap();
        assert_eq!(d.ancestors(c), set(&d, &["b", "d"]));
    }

    #[test]
    fn ancestors_empty_and_chain() {
        let g = Dag::from_edges(["a", "b"], &[]).unwrap();
        assert!(g.ancestors(0).is_empty());
        let chain = Dag::from_edges(["a", "b", "c", "d"], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(chain.ancestors(3).to_vec(), vec![0, 1, 2]);
        assert_eq!(chain.descendants(0).to_vec(), vec![1, 2, 3]);
    }

    #[test]
    fn skeleton_fig1_d1() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap();
        let sk = d.skeleton();
        let (a, b, c, dd) = (0, 1, 2, 3);
        let expected: BTreeSet<_> = [(a, c), (b, c), (c, dd), (b, dd)].into_iter().collect();
        assert_eq!(sk, expected);
        assert!(Pmg::new(["x"]).unwrap().skeleton().is_empty());
    }

    #[test]
    fn unshielded_colliders_fig1_d1() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap();
        let expected: BTreeSet<_> = [(0, 2, 3)].into_iter().collect();
        assert_eq!(d.unshielded_colliders(), expected);
        let chain = Dag::from_edges(["a", "b", "c"], &[(0, 1), (1, 2)]).unwrap();
        assert!(chain.unshielded_colliders().is_empty());
    }

    #[test]
    fn unshielded_colliders_fig2d_by_triple_scan() {
        // a->c, b->c, d<->c, a->d
        let mut m = MixedGraph::new(["a", "b", "c", "d"]).unwrap();
        m.add_directed(0, 2).unwrap();
        m.add_directed(1, 2).unwrap();
        m.add_bidirected(3, 2).unwrap();
        m.add_directed(0, 3).unwrap();
        // brute-force scan over all ordered triples
        let mut expected = BTreeSet::new();
        for a in 0..4 {
            for b in a + 1..4 {
                for c in 0..4 {
                    if c == a || c == b || m.adjacent(a, b) {
                        continue;
                    }
                    if m.mark(c, a) == Some(Mark::Arrow) && m.mark(c, b) == Some(Mark::Arrow) {
                        expected.insert((a, c, b));
                    }
                }
            }
        }
        assert_eq!(m.unshielded_colliders(), expected);
        assert_eq!(expected, [(0, 2, 1), (1, 2, 3)].into_iter().collect());
    }

    #[test]
    fn ancestral_checks() {
        // Fig. 2b: a<->c, b->c, d->c, d->a
        let mut m = MixedGraph::new(["a", "b", "c", "d"]).unwrap();
        m.add_bidirected(0, 2).unwrap();
        m.add_directed(1, 2).unwrap();
        m.add_directed(3, 2).unwrap();
        m.add_directed(3, 0).unwrap();
        assert!(m.is_ancestral());

        let mut bad = MixedGraph::new(["a", "b", "c"]).unwrap();
        bad.add_directed(0, 1).unwrap();
        bad.add_directed(1, 2).unwrap();
        bad.add_bidirected(0, 2).unwrap();
        assert_eq!(
            bad.ancestral_violation(),
            Some(AncestralViolation::AlmostDirectedCycle { a: 0, b: 2 })
        );

        let dag = Dag::from_edges(["a", "b", "c"], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(dag.is_ancestral());
    }

    #[test]
    fn dag_rejects_cycles_and_bidirected() {
        assert!(matches!(
            Dag::from_edges(["a", "b", "c"], &[(0, 1), (1, 2), (2, 0)]),
            Err(GraphError::Cyclic(_))
        ));
        let mut g = Pmg::new(["a", "b"]).unwrap();
        g.add_edge(0, 1, Mark::Arrow, Mark::Arrow).unwrap();
        assert!(matches!(Dag::from_pmg(g), Err(GraphError::BidirectedEdge(..))));
    }

    #[test]
    fn mixed_graph_rejects_circles_and_tails() {
        let mut g = Pmg::new(["a", "b"]).unwrap();
        g.add_edge(0, 1, Mark::Circle, Mark::Arrow).unwrap();
        assert!(matches!(MixedGraph::from_pmg(g.clone()), Err(GraphError::CircleMark(..))));
        g.set_edge(0, 1, Mark::Tail, Mark::Tail);
        assert!(matches!(MixedGraph::from_pmg(g), Err(GraphError::UndirectedEdge(..))));
    }

    #[test]
    fn add_edge_errors() {
        let mut g = Pmg::new(["a", "b"]).unwrap();
        assert!(matches!(g.add_edge(0, 0, Mark::Tail, Mark::Arrow), Err(GraphError::SelfLoop(_))));
        g.add_edge(0, 1, Mark::Tail, Mark::Arrow).unwrap();
        assert!(matches!(
            g.add_edge(1, 0, Mark::Tail, Mark::Arrow),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(Pmg::new(["a", "a"]), Err(GraphError::DuplicateVertex(_))));
    }

    #[test]
    fn refine_mark_is_monotone() {
        let mut g = Pmg::complete_circle(vec!["a".to_string(), "b".to_string()].into());
        assert_eq!(g.refine_mark(1, 0, Mark::Arrow), Ok(true));
        assert_eq!(g.refine_mark(1, 0, Mark::Arrow), Ok(false));
        assert!(g.refine_mark(1, 0, Mark::Tail).is_err());
        assert_eq!(g.edge(0, 1), Some((Mark::Circle, Mark::Arrow)));
    }

    #[test]
    fn pmg_inclusion() {
        let closure: Pmg = "nodes: a b c\nedge: a -> c\nedge: b <-> c\n".parse().unwrap();
        let partial: Pmg = "nodes: a b c\nedge: a o-> c\nedge: b <-> c\n".parse().unwrap();
        let circles: Pmg = "nodes: a b c\nedge: a o-o c\nedge: b o-> c\n".parse().unwrap();
        assert!(closure.is_subset_of(&partial));
        assert!(partial.is_subset_of(&circles));
        assert!(closure.is_subset_of(&circles));
        assert!(!partial.is_subset_of(&closure));
        let other_skeleton: Pmg = "nodes: a b c\nedge: a o-o c\n".parse().unwrap();
        assert!(!other_skeleton.is_subset_of(&circles));
    }
}
