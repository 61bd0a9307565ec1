//! Helpers shared by the integration tests: an m-separation oracle that
//! enumerates simple paths, and random graph builders.
#![allow(dead_code)]

use std::sync::Arc;

use kcd_core::{Dag, Mark, MixedGraph, Pmg, VertexSet};
use rand::Rng;

pub fn names(n: usize) -> Arc<[String]> {
    (0..n).map(|i| format!("v{i}")).collect::<Vec<_>>().into()
}

/// `cond` together with every vertex having a directed path into it,
/// computed by repeated sweeps over all edges.
fn ancestors_reflexive(g: &Pmg, cond: VertexSet) -> Vec<bool> {
    let n = g.n();
    let mut anc = vec![false; n];
    for c in cond.iter() {
        anc[c] = true;
    }
    loop {
        let mut grew = false;
        for u in 0..n {
            for v in 0..n {
                let directed = g.mark(u, v) == Some(Mark::Tail) && g.mark(v, u) == Some(Mark::Arrow);
                if directed && anc[v] && !anc[u] {
                    anc[u] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            return anc;
        }
    }
}

/// True when no simple path between `a` and `b` is open given `cond`: a
/// path is open when each collider is in `cond` or an ancestor of it and
/// each other inner vertex is outside `cond`.
pub fn path_separated(g: &Pmg, a: usize, b: usize, cond: VertexSet) -> bool {
    let anc = ancestors_reflexive(g, cond);
    let n = g.n();
    let mut path = vec![a];
    let mut on = vec![false; n];
    on[a] = true;

    fn open_path(g: &Pmg, b: usize, cond: VertexSet, anc: &[bool], path: &mut Vec<usize>, on: &mut [bool]) -> bool {
        let cur = *path.last().unwrap();
        for next in 0..g.n() {
            if on[next] || g.mark(cur, next).is_none() {
                continue;
            }
            if path.len() >= 2 {
                let prev = path[path.len() - 2];
                let collider = g.mark(cur, prev) == Some(Mark::Arrow) && g.mark(cur, next) == Some(Mark::Arrow);
                let passes = if collider { anc[cur] } else { !cond.contains(cur) };
                if !passes {
                    continue;
                }
            }
            if next == b {
                return true;
            }
            path.push(next);
            on[next] = true;
            let found = open_path(g, b, cond, anc, path, on);
            on[next] = false;
            path.pop();
            if found {
                return true;
            }
        }
        false
    }

    !open_path(g, b, cond, &anc, &mut path, &mut on)
}

/// DAG over `n` vertices with a random edge density.
pub fn random_dag(n: usize, rng: &mut impl Rng) -> Dag {
    let pairs = n * n.saturating_sub(1) / 2;
    let max_edges = if pairs == 0 { 0 } else { rng.random_range(0..=pairs) };
    let d = kcd_core::bench::random_dag(n, max_edges, rng).unwrap();
    Dag::from_parent_masks(names(n), &d.parent_masks()).unwrap()
}

/// DAG plus random bidirected edges between non-adjacent pairs; not
/// necessarily ancestral.
pub fn random_admg(n: usize, rng: &mut impl Rng) -> MixedGraph {
    let mut g = random_dag(n, rng).into_mixed();
    let p: f64 = rng.random_range(0.0..0.5);
    for u in 0..n {
        for v in u + 1..n {
            if !g.adjacent(u, v) && rng.random_bool(p) {
                g.add_bidirected(u, v).unwrap();
            }
        }
    }
    g
}

pub fn random_subset(n: usize, exclude: VertexSet, max_len: usize, rng: &mut impl Rng) -> VertexSet {
    let pool: Vec<usize> = (0..n).filter(|&v| !exclude.contains(v)).collect();
    let len = rng.random_range(0..=max_len.min(pool.len()));
    rand::seq::index::sample(rng, pool.len(), len).iter().map(|i| pool[i]).collect()
}
