//! Exhaustive oracles over DAG space: the labeled-DAG census, k-essential
//! graphs as edge unions of equivalent k-closures, classical essential
//! graphs, and PAGs as mark-wise unions of equivalent MAGs.
//!
//! Everything here is exponential and meant as ground truth for tests and
//! small inputs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::closure::{self, construct_k_closure};
use crate::graphs::{Dag, Mark, MixedGraph, Pmg};
use crate::separation::ConditioningBound;

/// Default largest vertex count the oracles accept.
pub const DEFAULT_DAG_CAP: usize = 5;
/// Largest vertex count the census can ever be asked for.
pub const HARD_DAG_CAP: usize = 6;
/// Default largest edge count for the `3^|E|` PAG sweep.
pub const DEFAULT_PAG_EDGE_BUDGET: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("{n} vertices exceeds the enumeration cap of {cap} (raise it with --cap, hard limit {HARD_DAG_CAP})")]
    CapExceeded { n: usize, cap: usize },
    #[error("{edges} edges exceeds the orientation budget of {budget} (raise it with --max-edges)")]
    BudgetExceeded { edges: usize, budget: usize },
    #[error("edge union of an empty set of edge types")]
    EmptyEdgeTypeSet,
    #[error("input is not a maximal ancestral graph: {0}")]
    NotMag(String),
}

/// Edge types observed for one vertex pair `(u, v)`, `u < v`, across a
/// family of graphs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct EdgeTypeSet(u8);

impl EdgeTypeSet {
    /// `u -> v`
    pub const RIGHT: EdgeTypeSet = EdgeTypeSet(1);
    /// `u <- v`
    pub const LEFT: EdgeTypeSet = EdgeTypeSet(2);
    /// `u <-> v`
    pub const BI: EdgeTypeSet = EdgeTypeSet(4);

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: EdgeTypeSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: EdgeTypeSet) -> EdgeTypeSet {
        EdgeTypeSet(self.0 | other.0)
    }

    /// Type of the edge `u – v` given its marks at `u` and `v`.
    pub fn of_marks(at_u: Mark, at_v: Mark) -> Option<EdgeTypeSet> {
        match (at_u, at_v) {
            (Mark::Tail, Mark::Arrow) => Some(Self::RIGHT),
            (Mark::Arrow, Mark::Tail) => Some(Self::LEFT),
            (Mark::Arrow, Mark::Arrow) => Some(Self::BI),
            _ => None,
        }
    }
}

impl std::ops::BitOr for EdgeTypeSet {
    type Output = EdgeTypeSet;

    fn bitor(self, rhs: EdgeTypeSet) -> EdgeTypeSet {
        self.union(rhs)
    }
}

/// Marks `(at u, at v)` of the union of the observed edge types:
///
/// | observed        | result  |
/// |-----------------|---------|
/// | `->`            | `->`    |
/// | `<-`            | `<-`    |
/// | `<->`           | `<->`   |
/// | `->`, `<-`      | `--`    |
/// | `->`, `<->`     | `o->`   |
/// | `<-`, `<->`     | `<-o`   |
/// | all three       | `o-o`   |
pub fn edge_union(s: EdgeTypeSet) -> Result<(Mark, Mark), EnumerationError> {
    use Mark::*;
    Ok(match s.0 {
        1 => (Tail, Arrow),
        2 => (Arrow, Tail),
        4 => (Arrow, Arrow),
        3 => (Tail, Tail),
        5 => (Circle, Arrow),
        6 => (Arrow, Circle),
        7 => (Circle, Circle),
        _ => return Err(EnumerationError::EmptyEdgeTypeSet),
    })
}

/// Mark-wise union used for PAGs: an endpoint keeps its mark only when all
/// members agree, otherwise it becomes a circle.
pub fn pag_union(s: EdgeTypeSet) -> Result<(Mark, Mark), EnumerationError> {
    use Mark::*;
    let at_u = |s: EdgeTypeSet| -> Vec<Mark> {
        let mut v = Vec::new();
        if s.contains(EdgeTypeSet::RIGHT) {
            v.push(Tail);
        }
        if s.contains(EdgeTypeSet::LEFT) || s.contains(EdgeTypeSet::BI) {
            v.push(Arrow);
        }
        v
    };
    let at_v = |s: EdgeTypeSet| -> Vec<Mark> {
        let mut v = Vec::new();
        if s.contains(EdgeTypeSet::LEFT) {
            v.push(Tail);
        }
        if s.contains(EdgeTypeSet::RIGHT) || s.contains(EdgeTypeSet::BI) {
            v.push(Arrow);
        }
        v
    };
    if s.is_empty() {
        return Err(EnumerationError::EmptyEdgeTypeSet);
    }
    let pick = |marks: Vec<Mark>| if marks.len() == 1 { marks[0] } else { Circle };
    Ok((pick(at_u(s)), pick(at_v(s))))
}

fn check_cap(n: usize, cap: usize) -> Result<(), EnumerationError> {
    let cap = cap.min(HARD_DAG_CAP);
    if n > cap {
        return Err(EnumerationError::CapExceeded { n, cap });
    }
    Ok(())
}

/// Calls `visit` with the parent masks of every labeled DAG on `n` vertices.
///
/// Each unordered pair is assigned none, `u -> v` or `v -> u` in turn;
/// branches closing a directed cycle are cut immediately.
fn for_each_dag(n: usize, mut visit: impl FnMut(&[u64])) {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut parents = vec![0u64; n];

    fn reaches(parents: &[u64], from: usize, to: usize) -> bool {
        // is there a directed path from -> .. -> to? walk parents of `to` upward
        let mut seen = 1u64 << to;
        let mut stack = vec![to];
        while let Some(x) = stack.pop() {
            if x == from {
                return true;
            }
            let mut p = parents[x] & !seen;
            while p != 0 {
                let y = p.trailing_zeros() as usize;
                p &= p - 1;
                seen |= 1 << y;
                stack.push(y);
            }
        }
        false
    }

    fn go(i: usize, pairs: &[(usize, usize)], parents: &mut [u64], visit: &mut dyn FnMut(&[u64])) {
        if i == pairs.len() {
            visit(parents);
            return;
        }
        let (u, v) = pairs[i];
        go(i + 1, pairs, parents, visit);
        if !reaches(parents, v, u) {
            parents[v] |= 1 << u;
            go(i + 1, pairs, parents, visit);
            parents[v] &= !(1 << u);
        }
        if !reaches(parents, u, v) {
            parents[u] |= 1 << v;
            go(i + 1, pairs, parents, visit);
            parents[u] &= !(1 << v);
        }
    }

    go(0, &pairs, &mut parents, &mut visit);
}

/// Parent masks of all labeled DAGs on `n` vertices, flattened with stride `n`.
/// Cached per `n` for `n <= DEFAULT_DAG_CAP`.
fn census_masks(n: usize) -> Arc<Vec<u8>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<u8>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut flat = Vec::new();
    for_each_dag(n, |parents| flat.extend(parents.iter().map(|&m| m as u8)));
    let flat = Arc::new(flat);
    if n <= DEFAULT_DAG_CAP {
        cache.lock().unwrap().insert(n, flat.clone());
    }
    flat
}

/// Number of labeled DAGs on `n` vertices, counted by enumeration.
pub fn count_dags(n: usize) -> Result<usize, EnumerationError> {
    check_cap(n, HARD_DAG_CAP)?;
    if n == 0 {
        return Ok(1);
    }
    Ok(census_masks(n).len() / n)
}

/// Every labeled DAG over `names`, each exactly once.
pub fn enumerate_dags(names: Arc<[String]>, cap: usize) -> Result<impl Iterator<Item = Dag>, EnumerationError> {
    let n = names.len();
    check_cap(n, cap)?;
    let masks = census_masks(n);
    let count = if n == 0 { 1 } else { masks.len() / n };
    Ok((0..count).map(move |i| {
        let parents: Vec<u64> = if n == 0 {
            Vec::new()
        } else {
            masks[i * n..(i + 1) * n].iter().map(|&m| m as u64).collect()
        };
        Dag::from_parent_masks(names.clone(), &parents).expect("census entries are acyclic")
    }))
}

/// Which equivalence test selects the members of a k-Markov class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EquivalenceRoute {
    /// Compare k-closures by skeleton and unshielded colliders (cached census).
    #[default]
    Closure,
    /// Compare every degree-k separation statement directly.
    Direct,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub cap: usize,
    pub route: EquivalenceRoute,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            cap: DEFAULT_DAG_CAP,
            route: EquivalenceRoute::Closure,
        }
    }
}

type ClassKey = (Vec<(usize, usize)>, Vec<(usize, usize, usize)>);

fn class_key(g: &Pmg) -> ClassKey {
    (
        g.skeleton().into_iter().collect(),
        g.unshielded_colliders().into_iter().collect(),
    )
}

fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v);
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Observed edge types per pair, indexed by [`pair_index`].
type TypeTable = Vec<EdgeTypeSet>;

fn observe(table: &mut TypeTable, g: &Pmg) {
    let n = g.n();
    for (u, v, mu, mv) in g.edges() {
        let t = EdgeTypeSet::of_marks(mu, mv).expect("closures only hold -> and <->");
        let slot = &mut table[pair_index(n, u, v)];
        *slot = slot.union(t);
    }
}

fn union_graph(
    names: Arc<[String]>,
    table: &TypeTable,
    rule: fn(EdgeTypeSet) -> Result<(Mark, Mark), EnumerationError>,
) -> Pmg {
    let n = names.len();
    let mut g = Pmg::with_names(names);
    for u in 0..n {
        for v in u + 1..n {
            let t = table[pair_index(n, u, v)];
            if !t.is_empty() {
                let (mu, mv) = rule(t).expect("non-empty");
                g.set_edge(u, v, mu, mv);
            }
        }
    }
    g
}

/// Per-class edge-type tables of every k-closure on `n` vertices.
fn closure_classes(n: usize, k: usize) -> Arc<HashMap<ClassKey, TypeTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<HashMap<ClassKey, TypeTable>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().unwrap().get(&(n, k)) {
        return hit.clone();
    }
    let names: Arc<[String]> = (0..n).map(|i| format!("v{i}")).collect::<Vec<_>>().into();
    let masks = census_masks(n);
    let count = masks.len() / n;
    let bound = ConditioningBound::new(k);
    let classes = (0..count)
        .into_par_iter()
        .fold(HashMap::<ClassKey, TypeTable>::new, |mut acc, i| {
            let parents: Vec<u64> = masks[i * n..(i + 1) * n].iter().map(|&m| m as u64).collect();
            let d = Dag::from_parent_masks(names.clone(), &parents).unwrap();
            let c = construct_k_closure(&d, bound);
            let table = acc
                .entry(class_key(c.graph()))
                .or_insert_with(|| vec![EdgeTypeSet::default(); n * (n - 1) / 2]);
            observe(table, c.graph());
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (key, table) in b {
                match a.get_mut(&key) {
                    Some(t) => {
                        for (x, y) in t.iter_mut().zip(table) {
                            *x = x.union(y);
                        }
                    }
                    None => {
                        a.insert(key, table);
                    }
                }
            }
            a
        });
    for (key, table) in &classes {
        // members of one class share the skeleton in the key
        for (u, v) in &key.0 {
            assert!(!table[pair_index(n, *u, *v)].is_empty());
        }
        assert_eq!(table.iter().filter(|t| !t.is_empty()).count(), key.0.len());
    }
    let classes = Arc::new(classes);
    cache.lock().unwrap().insert((n, k), classes.clone());
    classes
}

/// The k-essential graph of `d`: edge union of every k-closure Markov
/// equivalent to the k-closure of `d`.
pub fn k_essential_oracle(d: &Dag, bound: ConditioningBound) -> Result<Pmg, EnumerationError> {
    k_essential_oracle_with(d, bound, OracleOptions::default())
}

pub fn k_essential_oracle_with(d: &Dag, bound: ConditioningBound, opts: OracleOptions) -> Result<Pmg, EnumerationError> {
    let n = d.n();
    check_cap(n, opts.cap)?;
    let bound = bound.clamp(n);
    let names = d.names().clone();
    if n < 2 {
        return Ok(Pmg::with_names(names));
    }
    match opts.route {
        EquivalenceRoute::Closure => {
            let target = construct_k_closure(d, bound);
            let classes = closure_classes(n, bound.k());
            let table = classes
                .get(&class_key(target.graph()))
                .expect("the class of d is in the census");
            Ok(union_graph(names, table, edge_union))
        }
        EquivalenceRoute::Direct => {
            let mut table = vec![EdgeTypeSet::default(); n * (n - 1) / 2];
            for other in enumerate_dags(names.clone(), opts.cap)? {
                if closure::k_markov_equivalent_direct(d, &other, bound).expect("same vertices") {
                    observe(&mut table, construct_k_closure(&other, bound).graph());
                }
            }
            Ok(union_graph(names, &table, edge_union))
        }
    }
}

/// Classical essential graph (CPDAG) of `d` by enumerating its Markov
/// equivalence class: `->`/`<-` disagreements become `--`.
pub fn essential_graph_oracle(d: &Dag, cap: usize) -> Result<Pmg, EnumerationError> {
    let n = d.n();
    check_cap(n, cap)?;
    let names = d.names().clone();
    if n < 2 {
        return Ok(Pmg::with_names(names));
    }
    let key = class_key(d);
    let mut table = vec![EdgeTypeSet::default(); n * (n - 1) / 2];
    for other in enumerate_dags(names.clone(), cap)? {
        if class_key(&other) == key {
            observe(&mut table, &other);
        }
    }
    Ok(union_graph(names, &table, edge_union))
}

/// PAG of a MAG: mark-wise union over every orientation of its skeleton
/// that is a MAG Markov equivalent to it.
pub fn pag_oracle(m: &MixedGraph, edge_budget: usize) -> Result<Pmg, EnumerationError> {
    let edges: Vec<(usize, usize)> = m.skeleton().into_iter().collect();
    if edges.len() > edge_budget {
        return Err(EnumerationError::BudgetExceeded {
            edges: edges.len(),
            budget: edge_budget,
        });
    }
    if let Some(v) = m.ancestral_violation() {
        return Err(EnumerationError::NotMag(format!("{v:?}")));
    }
    if let Some((a, b)) = closure::maximality_violation(m) {
        return Err(EnumerationError::NotMag(format!(
            "{} and {} are non-adjacent but inseparable",
            m.name(a),
            m.name(b)
        )));
    }
    let n = m.n();
    let target_colliders = m.unshielded_colliders();
    let types = [EdgeTypeSet::RIGHT, EdgeTypeSet::LEFT, EdgeTypeSet::BI];
    let total = 3usize.pow(edges.len() as u32);

    let table = (0..total)
        .into_par_iter()
        .fold(
            || vec![EdgeTypeSet::default(); n * (n - 1) / 2],
            |mut acc, code| {
                let mut g = Pmg::with_names(m.names().clone());
                let mut c = code;
                for &(u, v) in &edges {
                    let (mu, mv) = edge_union(types[c % 3]).unwrap();
                    c /= 3;
                    g.set_edge(u, v, mu, mv);
                }
                if g.unshielded_colliders() != target_colliders {
                    return acc;
                }
                let cand = MixedGraph::from_pmg(g).expect("-> and <-> only");
                if !cand.is_ancestral() || closure::maximality_violation(&cand).is_some() {
                    return acc;
                }
                if closure::mag_markov_equivalent(m, &cand).expect("both ancestral") {
                    observe(&mut acc, &cand);
                }
                acc
            },
        )
        .reduce(
            || vec![EdgeTypeSet::default(); n * (n - 1) / 2],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.union(y);
                }
                a
            },
        );
    Ok(union_graph(m.names().clone(), &table, pag_union))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::parse_graph;

    fn names(n: usize) -> Arc<[String]> {
        (0..n).map(|i| format!("v{i}")).collect::<Vec<_>>().into()
    }

    /// Independent count: scan all 3^(n choose 2) assignments and keep the
    /// acyclic ones.
    fn brute_force_count(n: usize) -> usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let mut count = 0;
        for code in 0..3usize.pow(pairs.len() as u32) {
            let mut c = code;
            let mut edges = Vec::new();
            for &(u, v) in &pairs {
                match c % 3 {
                    1 => edges.push((u, v)),
                    2 => edges.push((v, u)),
                    _ => {}
                }
                c /= 3;
            }
            if Dag::from_edges(names(n).iter().cloned(), &edges).is_ok() {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn census_counts() {
        assert_eq!(count_dags(1).unwrap(), 1);
        assert_eq!(count_dags(2).unwrap(), 3);
        assert_eq!(count_dags(3).unwrap(), 25);
        assert_eq!(count_dags(4).unwrap(), 543);
        assert_eq!(brute_force_count(3), 25);
        assert_eq!(brute_force_count(4), 543);
        assert!(matches!(count_dags(7), Err(EnumerationError::CapExceeded { .. })));
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let all: Vec<Dag> = enumerate_dags(names(4), 5).unwrap().collect();
        let distinct: std::collections::HashSet<_> = all.iter().map(|d| d.parent_masks()).collect();
        assert_eq!(distinct.len(), all.len());
        assert!(enumerate_dags(names(6), 5).is_err());
    }

    #[test]
    fn edge_union_table() {
        use Mark::*;
        let (r, l, b) = (EdgeTypeSet::RIGHT, EdgeTypeSet::LEFT, EdgeTypeSet::BI);
        assert_eq!(edge_union(r).unwrap(), (Tail, Arrow));
        assert_eq!(edge_union(r | l).unwrap(), (Tail, Tail));
        assert_eq!(edge_union(r | b).unwrap(), (Circle, Arrow));
        assert_eq!(edge_union(l | b).unwrap(), (Arrow, Circle));
        assert_eq!(edge_union(r | l | b).unwrap(), (Circle, Circle));
        assert_eq!(edge_union(b).unwrap(), (Arrow, Arrow));
        assert_eq!(edge_union(EdgeTypeSet::default()), Err(EnumerationError::EmptyEdgeTypeSet));
        // the two unions only differ on {->, <-}
        for bits in 1..8u8 {
            let s = EdgeTypeSet(bits);
            if bits == 3 {
                assert_eq!(pag_union(s).unwrap(), (Circle, Circle));
            } else {
                assert_eq!(pag_union(s).unwrap(), edge_union(s).unwrap());
            }
        }
    }

    #[test]
    fn fig2_k_essential_graph() {
        let d1 = Dag::from_named_edges(&["a", "b", "c", "d"], &[("b", "c"), ("d", "c"), ("d", "a")]).unwrap();
        let eps = k_essential_oracle(&d1, ConditioningBound::new(0)).unwrap();
        let expected = parse_graph("nodes: a b c d\nedge: a o-> c\nedge: b -> c\nedge: d o-> c\nedge: a -- d\n").unwrap();
        assert_eq!(eps, expected);
    }

    #[test]
    fn single_edge() {
        let d = Dag::from_named_edges(&["u", "v"], &[("u", "v")]).unwrap();
        let eps = k_essential_oracle(&d, ConditioningBound::new(0)).unwrap();
        assert_eq!(eps.edge(0, 1), Some((Mark::Tail, Mark::Tail)));
        let pag = pag_oracle(d.as_mixed(), 12).unwrap();
        assert_eq!(pag.edge(0, 1), Some((Mark::Circle, Mark::Circle)));
    }

    #[test]
    fn direct_route_agrees_with_closure_route() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap();
        for k in 0..3 {
            let bound = ConditioningBound::new(k);
            let via_closure = k_essential_oracle(&d, bound).unwrap();
            let direct = k_essential_oracle_with(
                &d,
                bound,
                OracleOptions {
                    route: EquivalenceRoute::Direct,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(via_closure, direct, "k={k}");
        }
    }

    #[test]
    fn essential_graph_of_a_collider() {
        let d = Dag::from_named_edges(&["a", "b", "c"], &[("a", "c"), ("b", "c")]).unwrap();
        let cpdag = essential_graph_oracle(&d, 5).unwrap();
        assert_eq!(cpdag.edge(0, 2), Some((Mark::Tail, Mark::Arrow)));
        let chain = Dag::from_named_edges(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let cpdag = essential_graph_oracle(&chain, 5).unwrap();
        assert_eq!(cpdag.edge(0, 1), Some((Mark::Tail, Mark::Tail)));
    }

    #[test]
    fn pag_budget_and_input_checks() {
        let m = MixedGraph::from_pmg(parse_graph("nodes: a b c\nedge: a -> b\nedge: b -> c\n").unwrap()).unwrap();
        assert!(matches!(pag_oracle(&m, 1), Err(EnumerationError::BudgetExceeded { .. })));
        let bad = MixedGraph::from_pmg(parse_graph("nodes: a b c\nedge: a -> b\nedge: b -> c\nedge: a <-> c\n").unwrap()).unwrap();
        assert!(matches!(pag_oracle(&bad, 12), Err(EnumerationError::NotMag(_))));
    }
}
