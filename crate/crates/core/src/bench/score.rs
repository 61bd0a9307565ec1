use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::graphs::{Dag, Mark, Pmg};
use crate::kpc::cpdag;

/// Which graph predictions are scored against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    #[default]
    TrueDag,
    EssentialGraph,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl Counts {
    /// `2tp / (2tp + fp + fn)`, or 1 when nothing was predicted or expected.
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            1.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    fn tally(&mut self, predicted: bool, expected: bool) {
        match (predicted, expected) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreReport {
    pub arrowhead: Counts,
    pub tail: Counts,
    pub skeleton: Counts,
    pub mode: ReferenceMode,
}

impl ScoreReport {
    pub fn arrowhead_f1(&self) -> f64 {
        self.arrowhead.f1()
    }

    pub fn tail_f1(&self) -> f64 {
        self.tail.f1()
    }

    pub fn skeleton_f1(&self) -> f64 {
        self.skeleton.f1()
    }
}

/// Scores every endpoint of every vertex pair. An arrowhead (tail)
/// prediction is a true positive when the reference has the same mark at
/// that endpoint; missing edges count as having no mark. Circles are never
/// predictions.
pub fn score(pred: &Pmg, truth: &Dag, mode: ReferenceMode) -> Result<ScoreReport, BenchError> {
    if !pred.same_vertices(truth) {
        return Err(BenchError::Model("predicted graph and truth have different vertices".into()));
    }
    let reference = match mode {
        ReferenceMode::TrueDag => truth.as_pmg().clone(),
        ReferenceMode::EssentialGraph => cpdag(truth),
    };
    let mut report = ScoreReport {
        arrowhead: Counts::default(),
        tail: Counts::default(),
        skeleton: Counts::default(),
        mode,
    };
    let n = pred.n();
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let (p, r) = (pred.mark(u, v), reference.mark(u, v));
            report.arrowhead.tally(p == Some(Mark::Arrow), r == Some(Mark::Arrow));
            report.tail.tally(p == Some(Mark::Tail), r == Some(Mark::Tail));
            if u < v {
                report.skeleton.tally(p.is_some(), r.is_some());
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::parse_graph;

    fn fig5() -> Dag {
        Dag::from_named_edges(&["a", "b", "c", "u", "v"], &[("a", "b"), ("b", "c"), ("u", "b"), ("v", "c")]).unwrap()
    }

    #[test]
    fn perfect_and_empty_predictions() {
        let d = fig5();
        let r = score(d.as_pmg(), &d, ReferenceMode::TrueDag).unwrap();
        assert_eq!((r.arrowhead_f1(), r.tail_f1(), r.skeleton_f1()), (1.0, 1.0, 1.0));
        let empty = Pmg::with_names(d.names().clone());
        let r = score(&empty, &d, ReferenceMode::TrueDag).unwrap();
        assert_eq!(r.skeleton_f1(), 0.0);
        let none = Dag::from_named_edges(&["a", "b"], &[]).unwrap();
        let r = score(none.as_pmg(), &none, ReferenceMode::TrueDag).unwrap();
        assert_eq!(r.skeleton_f1(), 1.0);
    }

    #[test]
    fn fig5d_hand_count() {
        let k = parse_graph("nodes: a b c u v\nedge: a -> b\nedge: a -> c\nedge: b o-> c\nedge: u -> b\nedge: u -> c\nedge: v -> c\n").unwrap();
        let r = score(&k, &fig5(), ReferenceMode::TrueDag).unwrap();
        assert_eq!(r.arrowhead, Counts { tp: 4, fp: 2, fn_: 0 });
        assert_eq!(r.tail, Counts { tp: 3, fp: 2, fn_: 1 });
        assert_eq!(r.skeleton, Counts { tp: 4, fp: 2, fn_: 0 });
        assert!((r.arrowhead_f1() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn essential_reference_uses_the_cpdag() {
        let d = Dag::from_named_edges(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let undirected = parse_graph("nodes: a b c\nedge: a -- b\nedge: b -- c\n").unwrap();
        let r = score(&undirected, &d, ReferenceMode::EssentialGraph).unwrap();
        assert_eq!(r.tail.f1(), 1.0);
        assert_eq!(r.arrowhead, Counts::default());
        let r = score(&undirected, &d, ReferenceMode::TrueDag).unwrap();
        assert_eq!(r.arrowhead.fn_, 2);
    }

    #[test]
    fn vertex_mismatch() {
        let other = Dag::from_named_edges(&["p", "q"], &[]).unwrap();
        assert!(score(other.as_pmg(), &fig5(), ReferenceMode::TrueDag).is_err());
    }
}
