//! The k-PC learner and a PC-stable baseline.
//!
//! k-PC searches separating sets of size at most k, removes separable
//! pairs, orients unshielded colliders, runs the FCI rules R1–R3 and
//! R8–R10, and finishes with the tail rules R11/R12.

mod pc;
mod rules;
mod trace;

use std::sync::Arc;

use itertools::Itertools;
use rayon::prelude::*;

use crate::citest::{CiError, CiTester};
use crate::graphs::{DiscriminatingPath, MarkConflict, Pmg};
use crate::separation::{ConditioningBound, SearchScope, SepsetEntry, SepsetTable};
use crate::vertex_set::VertexSet;

pub use pc::{cpdag, meek_orient, pc_stable_learn, ColliderConflict, PcOptions, PcOutput};
pub use rules::r4_witness;
pub use trace::{replay, RuleEvent, RuleId};

/// How Step 5 is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Step5Mode {
    /// One pass of R11/R12 over the Step-4 graph.
    #[default]
    Single,
    /// Alternate the FCI rules and R11/R12 until nothing changes.
    Fixpoint,
    /// Stop after Step 4.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KpcOptions {
    pub scope: SearchScope,
    pub step5: Step5Mode,
    /// Run the discriminating-path rule R4 in Step 4. Without it, tails at
    /// non-colliders of discriminating paths can stay circles.
    pub r4: bool,
}

impl Default for KpcOptions {
    fn default() -> Self {
        KpcOptions {
            scope: SearchScope::default(),
            step5: Step5Mode::default(),
            r4: true,
        }
    }
}

/// Learner state after a run.
#[derive(Debug, Clone)]
pub struct LearnerState {
    /// Final graph K.
    pub k_graph: Pmg,
    /// K after edge removal, all marks circles.
    pub skeleton: Pmg,
    /// K after the FCI rules.
    pub after_step4: Pmg,
    pub sepsets: SepsetTable,
    pub bound: ConditioningBound,
    /// Every mark change after Step 2, in order.
    pub trace: Vec<RuleEvent>,
    /// Rule requests refused because the mark was already definite.
    pub conflicts: Vec<MarkConflict>,
    /// Set when a discriminating path still had an unresolved circle after
    /// Step 4 (only expected with `r4` off).
    pub r4_witness: Option<DiscriminatingPath>,
}

/// Outcome of the separating-set search.
pub(crate) struct Skeleton {
    pub graph: Pmg,
    pub sepsets: SepsetTable,
}

/// Level-wise search: at level `l`, every still-adjacent pair is tested
/// against subsets of size `l` of its pools, computed from the adjacency
/// frozen at the start of the level. Removals are applied between levels.
///
/// With `AllSubsets` the pool is `V \ {a, b}`, which gives the same first
/// hit as a direct search by size.
pub(crate) fn skeleton_search<T: CiTester + ?Sized>(
    tester: &T,
    names: Arc<[String]>,
    max_level: usize,
    scope: SearchScope,
    table_bound: ConditioningBound,
) -> Result<Skeleton, CiError> {
    let n = names.len();
    if tester.n_vars() != n {
        return Err(CiError::Shape(format!("{} variable names for a tester over {}", n, tester.n_vars())));
    }
    let mut g = Pmg::complete_circle(names);
    let mut sepsets = SepsetTable::new(table_bound);
    for level in 0..=max_level {
        let frozen = g.clone();
        let pairs: Vec<(usize, usize)> = frozen.skeleton().into_iter().collect();
        let pools = |a: usize, b: usize| -> Vec<VertexSet> {
            match scope {
                SearchScope::AllSubsets => vec![frozen.vertices().without(a).without(b)],
                SearchScope::NeighborSubsets => vec![frozen.neighbors(a).without(b), frozen.neighbors(b).without(a)],
            }
        };
        if pairs.iter().all(|&(a, b)| pools(a, b).iter().all(|p| p.len() < level)) {
            break;
        }
        let found: Vec<Option<VertexSet>> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let mut tried = Vec::new();
                for pool in pools(a, b) {
                    for combo in pool.iter().combinations(level) {
                        let s: VertexSet = combo.into_iter().collect();
                        if tried.contains(&s) {
                            continue;
                        }
                        if tester.independent(a, b, s)? {
                            return Ok(Some(s));
                        }
                        tried.push(s);
                    }
                }
                Ok(None)
            })
            .collect::<Result<_, CiError>>()?;
        for (&(a, b), s) in pairs.iter().zip(found) {
            if let Some(s) = s {
                g.remove_edge(a, b);
                sepsets.insert(a, b, SepsetEntry::Found(s));
            }
        }
    }
    for (a, b) in g.skeleton() {
        sepsets.insert(a, b, SepsetEntry::Covered);
    }
    Ok(Skeleton { graph: g, sepsets })
}

/// Runs k-PC over the variables named in `names` (indices as in `tester`).
pub fn kpc_learn<T: CiTester + ?Sized>(
    tester: &T,
    names: Arc<[String]>,
    bound: ConditioningBound,
    options: KpcOptions,
) -> Result<LearnerState, CiError> {
    let n = names.len();
    let bound = bound.clamp(n);
    let Skeleton { graph, sepsets } = skeleton_search(tester, names, bound.k(), options.scope, bound)?;
    let skeleton = graph.clone();
    let mut k_graph = graph;
    let (mut trace, mut conflicts) = (Vec::new(), Vec::new());
    let mut e = rules::Engine {
        g: &mut k_graph,
        trace: &mut trace,
        conflicts: &mut conflicts,
        sepsets: options.r4.then_some(&sepsets),
    };
    rules::orient_unshielded_colliders(&mut e, &sepsets);
    rules::fci_orient(&mut e);
    let after_step4 = e.g.clone();
    let r4 = r4_witness(&after_step4);
    if let Some(p) = &r4 {
        log::warn!("discriminating path {:?} left unresolved after Step 4", p.vertices);
    }
    match options.step5 {
        Step5Mode::Off => {}
        Step5Mode::Single => {
            rules::rule_r11_r12(&mut e, false);
        }
        Step5Mode::Fixpoint => {
            while rules::rule_r11_r12(&mut e, true) {
                rules::fci_orient(&mut e);
            }
        }
    }
    Ok(LearnerState {
        k_graph,
        skeleton,
        after_step4,
        sepsets,
        bound,
        trace,
        conflicts,
        r4_witness: r4,
    })
}

/// Largest number of queries k-PC can issue on `n` variables.
pub fn query_budget(n: usize, k: usize) -> u128 {
    fn binom(n: usize, r: usize) -> u128 {
        if r > n {
            return 0;
        }
        (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }
    let pairs = binom(n, 2);
    pairs * (0..=k.min(n.saturating_sub(2))).map(|i| binom(n.saturating_sub(2), i)).sum::<u128>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citest::{CountingTester, OracleTester};
    use crate::graphs::{parse_graph, Dag, Mark};

    fn learn(d: &Dag, k: usize, step5: Step5Mode) -> LearnerState {
        let t = OracleTester::new(d.as_mixed().clone());
        kpc_learn(
            &t,
            d.names().clone(),
            ConditioningBound::new(k),
            KpcOptions {
                step5,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn fig5_run() {
        let d = Dag::from_named_edges(&["a", "b", "c", "u", "v"], &[("a", "b"), ("b", "c"), ("u", "b"), ("v", "c")]).unwrap();
        let s = learn(&d, 0, Step5Mode::Single);
        let step4 = parse_graph(
            "nodes: a b c u v\nedge: a o-> b\nedge: a o-> c\nedge: b o-> c\nedge: u o-> b\nedge: u o-> c\nedge: v o-> c\n",
        )
        .unwrap();
        assert_eq!(s.after_step4, step4);
        let fin = parse_graph("nodes: a b c u v\nedge: a -> b\nedge: a -> c\nedge: b o-> c\nedge: u -> b\nedge: u -> c\nedge: v -> c\n").unwrap();
        assert_eq!(s.k_graph, fin);
        assert_eq!(replay(&s.skeleton, &s.trace), s.k_graph);
        assert!(s.r4_witness.is_none());
    }

    #[test]
    fn fig6_run() {
        let d = Dag::from_named_edges(&["a", "b", "c", "e"], &[("a", "b"), ("b", "c"), ("e", "c")]).unwrap();
        let s = learn(&d, 0, Step5Mode::Single);
        let step4 = parse_graph("nodes: a b c e\nedge: a o-o b\nedge: a o-> c\nedge: b o-> c\nedge: e o-> c\n").unwrap();
        assert_eq!(s.after_step4, step4);
        let fin = parse_graph("nodes: a b c e\nedge: a -- b\nedge: a o-> c\nedge: b o-> c\nedge: e -> c\n").unwrap();
        assert_eq!(s.k_graph, fin);
        assert_eq!(learn(&d, 0, Step5Mode::Fixpoint).k_graph, fin);
    }

    #[test]
    fn fig9_run() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("d", "c"), ("a", "d"), ("a", "b"), ("c", "b")]).unwrap();
        let s = learn(&d, 1, Step5Mode::Single);
        let fin = parse_graph("nodes: a b c d\nedge: a o-> b\nedge: c o-> b\nedge: a -- d\nedge: c -- d\nedge: d o-> b\n").unwrap();
        assert_eq!(s.k_graph, fin);
    }

    #[test]
    fn r4_orients_a_discriminated_non_collider() {
        // y is a non-collider on the discriminating path <x, u, y, v>
        let d = Dag::from_named_edges(&["u", "y", "v", "x"], &[("y", "u"), ("x", "u"), ("u", "v"), ("y", "v")]).unwrap();
        let want = parse_graph("nodes: u y v x\nedge: y o-> u\nedge: x o-> u\nedge: u -> v\nedge: y -> v\n").unwrap();
        let s = learn(&d, 2, Step5Mode::Off);
        assert_eq!(s.k_graph, want);
        assert!(s.r4_witness.is_none());
        assert!(s.trace.iter().any(|e| e.rule == RuleId::R4 && e.at == 1 && e.mark == Mark::Tail));
        let t = OracleTester::new(d.as_mixed().clone());
        let options = KpcOptions {
            step5: Step5Mode::Off,
            r4: false,
            ..Default::default()
        };
        let without = kpc_learn(&t, d.names().clone(), ConditioningBound::new(2), options).unwrap();
        assert_eq!(without.k_graph.edge(1, 2), Some((Mark::Circle, Mark::Arrow)));
        assert!(without.r4_witness.is_some());
    }

    #[test]
    fn never_conditions_on_more_than_k() {
        let d = Dag::from_named_edges(
            &["a", "b", "c", "d", "e", "f"],
            &[("a", "c"), ("b", "c"), ("c", "d"), ("d", "e"), ("b", "e"), ("f", "e"), ("a", "f")],
        )
        .unwrap();
        for k in 0..4 {
            let t = CountingTester::new(OracleTester::new(d.as_mixed().clone()));
            kpc_learn(&t, d.names().clone(), ConditioningBound::new(k), KpcOptions::default()).unwrap();
            assert!(t.max_cond_size() <= k);
            assert!(t.queries() as u128 <= query_budget(6, k));
        }
    }

    #[test]
    fn neighbour_scope_agrees_in_oracle_mode() {
        let d = Dag::from_named_edges(&["a", "b", "c", "d"], &[("a", "c"), ("c", "b"), ("d", "c"), ("d", "b")]).unwrap();
        let t = OracleTester::new(d.as_mixed().clone());
        for k in 0..3 {
            let all = kpc_learn(&t, d.names().clone(), ConditioningBound::new(k), KpcOptions::default()).unwrap();
            let nb = kpc_learn(
                &t,
                d.names().clone(),
                ConditioningBound::new(k),
                KpcOptions {
                    scope: SearchScope::NeighborSubsets,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(all.skeleton, nb.skeleton);
        }
    }

    #[test]
    fn budget_formula() {
        assert_eq!(query_budget(4, 0), 6);
        assert_eq!(query_budget(4, 1), 6 * 3);
        assert_eq!(query_budget(10, 2), 45 * (1 + 8 + 28));
    }
}
