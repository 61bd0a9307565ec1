//! PC-stable baseline: level-wise neighbour-subset search, v-structures,
//! Meek rules. Output uses `--` for undirected and `->` for directed edges.

use std::sync::Arc;

use crate::citest::{CiError, CiTester};
use crate::graphs::{Dag, Mark, Pmg};
use crate::separation::{ConditioningBound, SearchScope, SepsetTable};

/// What to do when two v-structures disagree on an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColliderConflict {
    /// Keep the orientation set first.
    #[default]
    FirstWins,
    /// Let the later v-structure overwrite, recording the replaced edge.
    Overwrite,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PcOptions {
    /// Largest conditioning-set size; unbounded when `None`.
    pub max_level: Option<usize>,
    pub collider_conflict: ColliderConflict,
}

#[derive(Debug, Clone)]
pub struct PcOutput {
    pub graph: Pmg,
    pub sepsets: SepsetTable,
    /// Edges `(u, v)` where a v-structure wanted `u -> v` against an
    /// existing `v -> u`.
    pub conflicts: Vec<(usize, usize)>,
}

pub fn pc_stable_learn<T: CiTester + ?Sized>(tester: &T, names: Arc<[String]>, options: PcOptions) -> Result<PcOutput, CiError> {
    let n = names.len();
    let max_level = options.max_level.unwrap_or(n).min(n.saturating_sub(2));
    let sk = super::skeleton_search(tester, names, max_level, SearchScope::NeighborSubsets, ConditioningBound::new(max_level))?;
    let mut g = sk.graph;
    for (u, v, _, _) in g.clone().edges() {
        g.set_edge(u, v, Mark::Tail, Mark::Tail);
    }
    let mut conflicts = Vec::new();
    for c in 0..n {
        let nb = g.neighbors(c);
        for a in nb {
            for b in nb.iter().filter(|&b| b > a) {
                if g.adjacent(a, b) || sk.sepsets.sepset(a, b).expect("separated pair").contains(c) {
                    continue;
                }
                for x in [a, b] {
                    orient(&mut g, x, c, options.collider_conflict, &mut conflicts);
                }
            }
        }
    }
    meek_orient(&mut g);
    Ok(PcOutput {
        graph: g,
        sepsets: sk.sepsets,
        conflicts,
    })
}

fn orient(g: &mut Pmg, u: usize, v: usize, policy: ColliderConflict, conflicts: &mut Vec<(usize, usize)>) {
    match g.edge(u, v) {
        Some((Mark::Tail, Mark::Tail)) => g.set_edge(u, v, Mark::Tail, Mark::Arrow),
        Some((Mark::Arrow, Mark::Tail)) => {
            conflicts.push((u, v));
            if policy == ColliderConflict::Overwrite {
                g.set_edge(u, v, Mark::Tail, Mark::Arrow);
            }
        }
        _ => {}
    }
}

fn undirected(g: &Pmg, u: usize, v: usize) -> bool {
    g.edge(u, v) == Some((Mark::Tail, Mark::Tail))
}

fn directed(g: &Pmg, u: usize, v: usize) -> bool {
    g.edge(u, v) == Some((Mark::Tail, Mark::Arrow))
}

/// Meek rules 1–4 to fixpoint on a graph of `--` and `->` edges.
pub fn meek_orient(g: &mut Pmg) {
    let n = g.n();
    loop {
        let mut changed = false;
        for a in 0..n {
            for b in g.neighbors(a) {
                if !undirected(g, a, b) {
                    continue;
                }
                let nb_a = g.neighbors(a);
                // 1: c -> a -- b, c and b non-adjacent
                let m1 = g.parents(a).iter().any(|c| !g.adjacent(c, b));
                // 2: a -> c -> b
                let m2 = g.children(a).iter().any(|c| directed(g, c, b));
                // 3: a -- c -> b <- d -- a, c and d non-adjacent
                let m3 = {
                    let cs: Vec<usize> = g
                        .parents(b)
                        .iter()
                        .filter(|&c| nb_a.contains(c) && undirected(g, a, c))
                        .collect();
                    cs.iter().enumerate().any(|(i, &c)| cs[i + 1..].iter().any(|&d| !g.adjacent(c, d)))
                };
                // 4: a -- c -> d -> b, a adjacent to d, c and b non-adjacent
                let m4 = nb_a.iter().filter(|&c| undirected(g, a, c) && !g.adjacent(c, b)).any(|c| {
                    g.children(c)
                        .iter()
                        .any(|d| d != a && nb_a.contains(d) && directed(g, d, b))
                });
                if m1 || m2 || m3 || m4 {
                    g.set_edge(a, b, Mark::Tail, Mark::Arrow);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// CPDAG of a DAG: skeleton, v-structures, Meek rules.
pub fn cpdag(d: &Dag) -> Pmg {
    let mut g = Pmg::with_names(d.names().clone());
    for (u, v) in d.skeleton() {
        g.set_edge(u, v, Mark::Tail, Mark::Tail);
    }
    for (a, c, b) in d.unshielded_colliders() {
        g.set_edge(a, c, Mark::Tail, Mark::Arrow);
        g.set_edge(b, c, Mark::Tail, Mark::Arrow);
    }
    meek_orient(&mut g);
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citest::OracleTester;
    use crate::enumeration::{enumerate_dags, essential_graph_oracle};

    #[test]
    fn cpdag_matches_the_enumeration_oracle_on_all_four_vertex_dags() {
        let names: Arc<[String]> = ["a", "b", "c", "d"].map(String::from).to_vec().into();
        for d in enumerate_dags(names, 4).unwrap() {
            assert_eq!(cpdag(&d), essential_graph_oracle(&d, 4).unwrap(), "{d:?}");
        }
    }

    #[test]
    fn oracle_pc_recovers_the_cpdag() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap();
        let t = OracleTester::new(d.as_mixed().clone());
        let out = pc_stable_learn(&t, d.names().clone(), PcOptions::default()).unwrap();
        assert_eq!(out.graph, cpdag(&d));
        assert!(out.conflicts.is_empty());
    }

    #[test]
    fn empty_truth_gives_empty_graph() {
        let d = Dag::from_named_edges(&["a", "b", "c"], &[]).unwrap();
        let t = OracleTester::new(d.as_mixed().clone());
        let out = pc_stable_learn(&t, d.names().clone(), PcOptions::default()).unwrap();
        assert_eq!(out.graph.edge_count(), 0);
    }

    #[test]
    fn collider_conflict_policies() {
        // a -> b <- c and b -> c <- d cannot both hold: edge b - c is contested
        let names: Arc<[String]> = ["a", "b", "c", "d"].map(String::from).to_vec().into();
        let mut g = Pmg::with_names(names);
        for (u, v) in [(0, 1), (1, 2), (2, 3)] {
            g.set_edge(u, v, Mark::Tail, Mark::Tail);
        }
        let mut conflicts = Vec::new();
        let mut first = g.clone();
        orient(&mut first, 2, 1, ColliderConflict::FirstWins, &mut conflicts);
        orient(&mut first, 1, 2, ColliderConflict::FirstWins, &mut conflicts);
        assert_eq!(first.edge(1, 2), Some((Mark::Arrow, Mark::Tail)));
        let mut over = g.clone();
        orient(&mut over, 2, 1, ColliderConflict::Overwrite, &mut conflicts);
        orient(&mut over, 1, 2, ColliderConflict::Overwrite, &mut conflicts);
        assert_eq!(over.edge(1, 2), Some((Mark::Tail, Mark::Arrow)));
        assert_eq!(conflicts, vec![(1, 2), (1, 2)]);
    }
}
