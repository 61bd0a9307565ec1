//! d-separation on DAGs, m-separation on mixed graphs, and the bounded
//! separating-set search behind k-covered pairs and the learners.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;

use crate::graphs::{Mark, MixedGraph, Pmg};
use crate::vertex_set::VertexSet;

/// The integer `k` bounding conditioning-set size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditioningBound(usize);

impl ConditioningBound {
    pub fn new(k: usize) -> Self {
        ConditioningBound(k)
    }

    pub fn k(self) -> usize {
        self.0
    }

    /// Bound effective on `n` vertices: larger values behave like `n - 2`.
    pub fn effective(self, n: usize) -> usize {
        self.0.min(n.saturating_sub(2))
    }

    /// Clamps to `n - 2`, logging when the bound changes.
    pub fn clamp(self, n: usize) -> Self {
        let eff = self.effective(n);
        if eff != self.0 {
            log::warn!("conditioning bound k={} exceeds n-2={}, clamping", self.0, eff);
        }
        ConditioningBound(eff)
    }
}

/// A separation statement `a ⟂ b | cond`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SepQuery {
    pub a: usize,
    pub b: usize,
    pub cond: VertexSet,
}

impl SepQuery {
    /// `None` when `a == b` or the conditioning set contains an endpoint.
    pub fn new(a: usize, b: usize, cond: VertexSet) -> Option<Self> {
        (a != b && !cond.contains(a) && !cond.contains(b)).then_some(SepQuery { a, b, cond })
    }

    /// Same statement with `a < b`.
    pub fn canonical(self) -> Self {
        if self.a <= self.b {
            self
        } else {
            SepQuery {
                a: self.b,
                b: self.a,
                cond: self.cond,
            }
        }
    }
}

/// Which conditioning sets the separating-set search considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchScope {
    /// Every subset of `V \ {a, b}`.
    #[default]
    AllSubsets,
    /// Subsets of the current neighbours of `a`, then of `b` (PC style).
    NeighborSubsets,
}

/// Outcome of a bounded separating-set search for one pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SepsetEntry {
    Found(VertexSet),
    Covered,
}

/// Separating sets found for unordered vertex pairs under a common bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SepsetTable {
    bound: ConditioningBound,
    entries: BTreeMap<(usize, usize), SepsetEntry>,
}

impl SepsetTable {
    pub fn new(bound: ConditioningBound) -> Self {
        SepsetTable {
            bound,
            entries: BTreeMap::new(),
        }
    }

    pub fn bound(&self) -> ConditioningBound {
        self.bound
    }

    pub fn insert(&mut self, a: usize, b: usize, entry: SepsetEntry) {
        if let SepsetEntry::Found(s) = entry {
            assert!(s.len() <= self.bound.k(), "separating set larger than the bound");
        }
        self.entries.insert((a.min(b), a.max(b)), entry);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<SepsetEntry> {
        self.entries.get(&(a.min(b), a.max(b))).copied()
    }

    /// The recorded separating set, if the pair was separated.
    pub fn sepset(&self, a: usize, b: usize) -> Option<VertexSet> {
        match self.get(a, b)? {
            SepsetEntry::Found(s) => Some(s),
            SepsetEntry::Covered => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), SepsetEntry)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// m-separation (d-separation on DAGs) of `a` and `b` given `cond`.
///
/// Reachability over `(vertex, arrived-with-arrowhead)` states. A vertex is
/// passable as a collider iff it is in `cond` or an ancestor of it, and as a
/// non-collider iff it is not in `cond`.
pub fn is_separated(g: &MixedGraph, a: usize, b: usize, cond: VertexSet) -> bool {
    !reachable(g.as_pmg(), a, cond).contains(b)
}

/// Vertices m-connected to `a` given `cond`.
pub fn reachable(g: &Pmg, a: usize, cond: VertexSet) -> VertexSet {
    let n = g.n();
    let anc = g.ancestors_of_set(cond);
    // visited[v][0]: arrived with tail at v, visited[v][1]: with arrowhead
    let mut visited = vec![[false; 2]; n];
    let mut stack = Vec::new();
    let mut reached = VertexSet::EMPTY;
    for w in g.neighbors(a) {
        let arrow = g.mark(w, a) == Some(Mark::Arrow);
        if !visited[w][arrow as usize] {
            visited[w][arrow as usize] = true;
            stack.push((w, arrow));
        }
    }
    while let Some((w, arrow_in)) = stack.pop() {
        reached.insert(w);
        for x in g.neighbors(w) {
            let arrow_out = g.mark(w, x) == Some(Mark::Arrow);
            let pass = if arrow_in && arrow_out {
                anc.contains(w)
            } else {
                !cond.contains(w)
            };
            if !pass {
                continue;
            }
            let arrow_at_x = g.mark(x, w) == Some(Mark::Arrow);
            if !visited[x][arrow_at_x as usize] {
                visited[x][arrow_at_x as usize] = true;
                stack.push((x, arrow_at_x));
            }
        }
    }
    reached.without(a)
}

/// Searches for a separating set of size at most `k`.
///
/// Sizes are tried in increasing order; within a size, each pool is scanned
/// in turn and subsets are enumerated lexicographically by vertex index. The
/// first set for which `test` returns `true` wins. Sets appearing in more
/// than one pool are tested once.
pub fn search_sepset<E>(
    k: usize,
    pools: &[VertexSet],
    mut test: impl FnMut(VertexSet) -> Result<bool, E>,
) -> Result<Option<VertexSet>, E> {
    let mut tried: HashSet<VertexSet> = HashSet::new();
    let dedupe = pools.len() > 1;
    for size in 0..=k {
        for pool in pools {
            if pool.len() < size {
                continue;
            }
            for combo in pool.iter().combinations(size) {
                let set: VertexSet = combo.into_iter().collect();
                if dedupe && !tried.insert(set) {
                    continue;
                }
                if test(set)? {
                    return Ok(Some(set));
                }
            }
        }
    }
    Ok(None)
}

/// Candidate pools for a pair under a scope, using `adjacency` for the
/// neighbour scope.
pub fn scope_pools(g_adjacency: &Pmg, a: usize, b: usize, scope: SearchScope) -> Vec<VertexSet> {
    match scope {
        SearchScope::AllSubsets => vec![g_adjacency.vertices().without(a).without(b)],
        SearchScope::NeighborSubsets => vec![
            g_adjacency.neighbors(a).without(b),
            g_adjacency.neighbors(b).without(a),
        ],
    }
}

/// Bounded separating-set search on a graph; adjacency for the neighbour
/// scope is taken from `g` itself.
pub fn find_sepset_upto_k(
    g: &MixedGraph,
    a: usize,
    b: usize,
    bound: ConditioningBound,
    scope: SearchScope,
) -> SepsetEntry {
    assert_ne!(a, b);
    let k = bound.effective(g.n());
    let pools = scope_pools(g, a, b, scope);
    let found = search_sepset::<std::convert::Infallible>(k, &pools, |c| Ok(is_separated(g, a, b, c)))
        .unwrap_or_else(|e| match e {});
    match found {
        Some(s) => SepsetEntry::Found(s),
        None => SepsetEntry::Covered,
    }
}

/// No set of size at most `k` separates the pair; adjacent pairs always qualify.
pub fn is_k_covered(g: &MixedGraph, a: usize, b: usize, bound: ConditioningBound) -> bool {
    g.adjacent(a, b) || find_sepset_upto_k(g, a, b, bound, SearchScope::AllSubsets) == SepsetEntry::Covered
}

/// Any subset of `V \ {a, b}` separating the pair, searched by size.
pub fn find_any_sepset(g: &MixedGraph, a: usize, b: usize) -> Option<VertexSet> {
    match find_sepset_upto_k(g, a, b, ConditioningBound::new(g.n()), SearchScope::AllSubsets) {
        SepsetEntry::Found(s) => Some(s),
        SepsetEntry::Covered => None,
    }
}

/// First statement with `|cond| <= k` on which the two graphs disagree,
/// scanning pairs in index order and sets by size then lexicographically.
pub fn first_disagreement(g1: &MixedGraph, g2: &MixedGraph, k: usize) -> Option<SepQuery> {
    assert_eq!(g1.n(), g2.n());
    let n = g1.n();
    for a in 0..n {
        for b in a + 1..n {
            let pool = VertexSet::full(n).without(a).without(b);
            let hit = search_sepset::<std::convert::Infallible>(k, &[pool], |c| {
                Ok(is_separated(g1, a, b, c) != is_separated(g2, a, b, c))
            })
            .unwrap_or_else(|e| match e {});
            if let Some(cond) = hit {
                return Some(SepQuery { a, b, cond });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Dag;

    fn fig1_d1() -> Dag {
        Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap()
    }

    fn s(g: &Pmg, names: &[&str]) -> VertexSet {
        names.iter().map(|n| g.vertex(n).unwrap()).collect()
    }

    #[test]
    fn fig1_separations() {
        let d = fig1_d1();
        assert!(is_separated(&d, 0, 1, s(&d, &["c", "d"])));
        assert!(!is_separated(&d, 0, 1, s(&d, &["c"])));
        assert!(!is_separated(&d, 1, 0, s(&d, &["c"])));
    }

    #[test]
    fn canonical_collider() {
        let d = Dag::from_edges(["a", "b", "c"], &[(0, 2), (1, 2)]).unwrap();
        assert!(is_separated(&d, 0, 1, VertexSet::EMPTY));
        assert!(!is_separated(&d, 0, 1, VertexSet::singleton(2)));
    }

    #[test]
    fn collider_opened_by_descendant() {
        let d = Dag::from_edges(["a", "b", "c", "e"], &[(0, 2), (1, 2), (2, 3)]).unwrap();
        assert!(!is_separated(&d, 0, 1, VertexSet::singleton(3)));
    }

    #[test]
    fn fig4_pair() {
        let names = ["a", "b", "c", "d", "e", "f"];
        let d1 = Dag::from_named_edges(&names, &[("a", "c"), ("c", "d"), ("e", "d"), ("e", "b"), ("f", "c"), ("f", "e")]).unwrap();
        let d2 = Dag::from_named_edges(&names, &[("a", "c"), ("c", "d"), ("d", "e"), ("e", "b"), ("f", "c"), ("f", "e")]).unwrap();
        assert!(is_separated(&d1, 0, 1, VertexSet::EMPTY));
        assert!(!is_separated(&d2, 0, 1, VertexSet::EMPTY));
    }

    #[test]
    fn sepset_search_fig2() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("b", "c"), ("d", "c"), ("d", "a")]).unwrap();
        let k0 = ConditioningBound::new(0);
        assert_eq!(find_sepset_upto_k(&d, 0, 2, k0, SearchScope::AllSubsets), SepsetEntry::Covered);
        assert_eq!(
            find_sepset_upto_k(&d, 0, 1, k0, SearchScope::AllSubsets),
            SepsetEntry::Found(VertexSet::EMPTY)
        );
    }

    #[test]
    fn k_covered_fig1() {
        let d = fig1_d1();
        assert!(is_k_covered(&d, 0, 1, ConditioningBound::new(1)));
        assert!(!is_k_covered(&d, 0, 1, ConditioningBound::new(2)));
        assert!(is_k_covered(&d, 0, 2, ConditioningBound::new(0)));
    }

    #[test]
    fn search_order_is_size_then_lexicographic() {
        let mut seen = Vec::new();
        let pool: VertexSet = [1, 2, 3].into_iter().collect();
        let _ = search_sepset::<()>(2, &[pool], |c| {
            seen.push(c.to_vec());
            Ok(false)
        });
        assert_eq!(
            seen,
            vec![vec![], vec![1], vec![2], vec![3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
    }

    #[test]
    fn neighbor_pools_dedupe() {
        let mut seen = Vec::new();
        let p1: VertexSet = [1, 2].into_iter().collect();
        let p2: VertexSet = [2, 3].into_iter().collect();
        let _ = search_sepset::<()>(1, &[p1, p2], |c| {
            seen.push(c.to_vec());
            Ok(false)
        });
        assert_eq!(seen, vec![vec![], vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn bound_clamps() {
        assert_eq!(ConditioningBound::new(7).effective(4), 2);
        assert_eq!(ConditioningBound::new(1).effective(4), 1);
        assert_eq!(ConditioningBound::new(3).clamp(3).k(), 1);
    }
}
