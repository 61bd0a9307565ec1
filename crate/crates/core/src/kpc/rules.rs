//! Orientation rules on a PMG: unshielded colliders, R1–R4, R8–R10 and
//! the bounded-conditioning tail rules R11/R12.

use crate::graphs::{DiscriminatingPath, Mark, MarkConflict, Pmg};
use crate::separation::SepsetTable;
use crate::vertex_set::VertexSet;

use super::trace::{RuleEvent, RuleId};

/// Mutable view used by the rules: marks only ever leave `Circle`, and
/// requests to rewrite a definite mark are logged and skipped.
pub(crate) struct Engine<'a> {
    pub g: &'a mut Pmg,
    pub trace: &'a mut Vec<RuleEvent>,
    pub conflicts: &'a mut Vec<MarkConflict>,
    /// Separating sets for R4; R4 is skipped when absent.
    pub sepsets: Option<&'a SepsetTable>,
}

impl Engine<'_> {
    fn set(&mut self, rule: RuleId, at: usize, other: usize, mark: Mark, witness: &[usize]) -> bool {
        match self.g.refine_mark(at, other, mark) {
            Ok(true) => {
                self.trace.push(RuleEvent {
                    rule,
                    at,
                    other,
                    mark,
                    witness: witness.to_vec(),
                });
                true
            }
            Ok(false) => false,
            Err(c) => {
                log::debug!("{rule:?} skipped: {c}");
                self.conflicts.push(c);
                false
            }
        }
    }

    fn is(&self, at: usize, other: usize, m: Mark) -> bool {
        self.g.mark(at, other) == Some(m)
    }

    /// `u -> v`
    fn directed(&self, u: usize, v: usize) -> bool {
        self.is(u, v, Mark::Tail) && self.is(v, u, Mark::Arrow)
    }

    /// `u o-> v`
    fn circle_arrow(&self, u: usize, v: usize) -> bool {
        self.is(u, v, Mark::Circle) && self.is(v, u, Mark::Arrow)
    }
}

/// Step 3: arrowheads at `c` for every non-adjacent `a, b` with common
/// neighbour `c` outside `S_{a,b}`.
pub(crate) fn orient_unshielded_colliders(e: &mut Engine, sepsets: &SepsetTable) {
    let n = e.g.n();
    for c in 0..n {
        let nb = e.g.neighbors(c);
        for a in nb {
            for b in nb.iter().filter(|&b| b > a) {
                if e.g.adjacent(a, b) {
                    continue;
                }
                let s = sepsets
                    .sepset(a, b)
                    .expect("non-adjacent pairs have a recorded separating set");
                if !s.contains(c) {
                    e.set(RuleId::UC, c, a, Mark::Arrow, &[a, c, b]);
                    e.set(RuleId::UC, c, b, Mark::Arrow, &[a, c, b]);
                }
            }
        }
    }
}

/// R1: `a *-> b o-* c`, `a, c` non-adjacent, gives `b -> c`.
fn r1(e: &mut Engine) -> bool {
    let mut changed = false;
    for b in 0..e.g.n() {
        for a in e.g.arrows_at(b) {
            for c in e.g.neighbors(b).without(a) {
                if e.is(b, c, Mark::Circle) && !e.g.adjacent(a, c) {
                    changed |= e.set(RuleId::R1, b, c, Mark::Tail, &[a, b, c]);
                    changed |= e.set(RuleId::R1, c, b, Mark::Arrow, &[a, b, c]);
                }
            }
        }
    }
    changed
}

/// R2: `a -> b *-> c` or `a *-> b -> c`, with `a *-o c`, gives an arrowhead at `c`.
fn r2(e: &mut Engine) -> bool {
    let mut changed = false;
    for c in 0..e.g.n() {
        for a in e.g.circles_at(c) {
            let hit = e.g.neighbors(a).intersection(e.g.neighbors(c)).iter().find(|&b| {
                (e.directed(a, b) && e.is(c, b, Mark::Arrow)) || (e.is(b, a, Mark::Arrow) && e.directed(b, c))
            });
            if let Some(b) = hit {
                changed |= e.set(RuleId::R2, c, a, Mark::Arrow, &[a, b, c]);
            }
        }
    }
    changed
}

/// R3: `a *-> b <-* c`, `a *-o d o-* c`, `a, c` non-adjacent, `d *-o b`,
/// gives an arrowhead at `b`.
fn r3(e: &mut Engine) -> bool {
    let mut changed = false;
    for b in 0..e.g.n() {
        for d in e.g.circles_at(b) {
            let into_b = e.g.arrows_at(b);
            let mut hit = None;
            'outer: for a in into_b.intersection(e.g.circles_at(d)) {
                for c in into_b.intersection(e.g.circles_at(d)).iter().filter(|&c| c > a) {
                    if !e.g.adjacent(a, c) {
                        hit = Some((a, c));
                        break 'outer;
                    }
                }
            }
            if let Some((a, c)) = hit {
                changed |= e.set(RuleId::R3, b, d, Mark::Arrow, &[a, b, c, d]);
            }
        }
    }
    changed
}

/// Edges `a o-> c` in pair order.
fn circle_arrow_edges(e: &Engine) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..e.g.n() {
        for c in e.g.neighbors(a) {
            if e.circle_arrow(a, c) {
                out.push((a, c));
            }
        }
    }
    out
}

/// R8: `a -> b -> c` with `a o-> c` gives `a -> c`.
fn r8(e: &mut Engine) -> bool {
    let mut changed = false;
    for (a, c) in circle_arrow_edges(e) {
        let hit = e.g.children(a).intersection(e.g.parents(c)).first();
        if let Some(b) = hit {
            changed |= e.set(RuleId::R8, a, c, Mark::Tail, &[a, b, c]);
        }
    }
    changed
}

/// An uncovered potentially directed path `<a, first, .., target>`, if any.
///
/// Every edge `u_i - u_{i+1}` lacks an arrowhead at `u_i`, and every
/// `u_i, u_{i+2}` is non-adjacent.
pub(crate) fn uncovered_pd_path(g: &Pmg, a: usize, first: usize, target: usize) -> Option<Vec<usize>> {
    if !g.adjacent(a, first) || g.mark(a, first) == Some(Mark::Arrow) {
        return None;
    }
    let mut path = vec![a, first];
    if first == target {
        return Some(path);
    }
    fn go(g: &Pmg, path: &mut Vec<usize>, on: VertexSet, target: usize) -> bool {
        let cur = path[path.len() - 1];
        let prev = path[path.len() - 2];
        for w in g.neighbors(cur).difference(on) {
            if g.mark(cur, w) == Some(Mark::Arrow) || g.adjacent(prev, w) {
                continue;
            }
            path.push(w);
            if w == target || go(g, path, on.with(w), target) {
                return true;
            }
            path.pop();
        }
        false
    }
    go(g, &mut path, VertexSet::from_iter([a, first]), target).then_some(path)
}

/// R9: `a o-> c` and an uncovered p.d. path `<a, b, .., c>` with `b, c`
/// non-adjacent give `a -> c`.
fn r9(e: &mut Engine) -> bool {
    let mut changed = false;
    for (a, c) in circle_arrow_edges(e) {
        if !e.circle_arrow(a, c) {
            continue;
        }
        let found = e
            .g
            .neighbors(a)
            .iter()
            .filter(|&b| b != c && !e.g.adjacent(b, c))
            .find_map(|b| uncovered_pd_path(e.g, a, b, c));
        if let Some(p) = found {
            changed |= e.set(RuleId::R9, a, c, Mark::Tail, &p);
        }
    }
    changed
}

/// R10: `a o-> c`, `b -> c <- d`, uncovered p.d. paths from `a` to `b` and
/// from `a` to `d` whose vertices after `a` (possibly `b`, `d`
/// themselves) are distinct and non-adjacent, give `a -> c`.
fn r10(e: &mut Engine) -> bool {
    let mut changed = false;
    for (a, c) in circle_arrow_edges(e) {
        if !e.circle_arrow(a, c) {
            continue;
        }
        let parents: Vec<usize> = e.g.parents(c).without(a).to_vec();
        // first vertices of uncovered p.d. paths from a to each parent
        let starts: Vec<VertexSet> = parents
            .iter()
            .map(|&t| {
                e.g.neighbors(a)
                    .iter()
                    .filter(|&mu| mu != c && uncovered_pd_path(e.g, a, mu, t).is_some())
                    .collect()
            })
            .collect();
        let mut hit = None;
        'search: for i in 0..parents.len() {
            for j in i + 1..parents.len() {
                for mu in starts[i] {
                    for omega in starts[j] {
                        if mu != omega && !e.g.adjacent(mu, omega) {
                            hit = Some(vec![a, c, parents[i], parents[j], mu, omega]);
                            break 'search;
                        }
                    }
                }
            }
        }
        if let Some(w) = hit {
            changed |= e.set(RuleId::R10, a, c, Mark::Tail, &w);
        }
    }
    changed
}

/// R4: on a discriminating path `<x, .., u, y, v>` with `y o-* v`, orient
/// `y -> v` when `y` is in the separating set of `x` and `v`, otherwise
/// `u <-> y <-> v`.
fn r4(e: &mut Engine) -> bool {
    let Some(sepsets) = e.sepsets else {
        return false;
    };
    for p in e.g.discriminating_paths() {
        let (x, u, y, v) = (p.endpoint(), p.u(), p.y(), p.v());
        if !e.is(y, v, Mark::Circle) {
            continue;
        }
        let Some(s) = sepsets.sepset(x, v) else {
            continue;
        };
        let mut changed = false;
        if s.contains(y) {
            changed |= e.set(RuleId::R4, y, v, Mark::Tail, &p.vertices);
            changed |= e.set(RuleId::R4, v, y, Mark::Arrow, &p.vertices);
        } else {
            for (at, other) in [(y, u), (u, y), (y, v), (v, y)] {
                changed |= e.set(RuleId::R4, at, other, Mark::Arrow, &p.vertices);
            }
        }
        if changed {
            return true;
        }
    }
    false
}

/// R1–R4 and R8–R10 until nothing changes. Rules are tried in id order and
/// the scan restarts from R1 after any rule fires.
pub(crate) fn fci_orient(e: &mut Engine) {
    let rules: [fn(&mut Engine) -> bool; 7] = [r1, r2, r3, r4, r8, r9, r10];
    'restart: loop {
        for rule in rules {
            if rule(e) {
                continue 'restart;
            }
        }
        break;
    }
}

/// R11/R12 computed on a snapshot of `e.g` and then applied.
///
/// A vertex `a` is eligible when no edge has an arrowhead at `a`. With
/// `undirected_in_c`, existing `a -- c` edges count as members of C for the
/// non-adjacency tests (used when Step 5 is re-run).
pub(crate) fn rule_r11_r12(e: &mut Engine, undirected_in_c: bool) -> bool {
    let snap = e.g.clone();
    let mut actions: Vec<(RuleId, usize, usize, Mark, Vec<usize>)> = Vec::new();
    for a in 0..snap.n() {
        if !snap.arrows_at(a).is_empty() {
            continue;
        }
        let nb = snap.neighbors(a);
        let circ = |x: usize| snap.mark(a, x) == Some(Mark::Circle);
        let b_set: VertexSet = nb.iter().filter(|&b| circ(b) && snap.mark(b, a) == Some(Mark::Arrow)).collect();
        let c_set: VertexSet = nb.iter().filter(|&c| circ(c) && snap.mark(c, a) == Some(Mark::Circle)).collect();
        let mut c_test = c_set;
        if undirected_in_c {
            c_test = c_test.union(snap.tails_at(a).iter().filter(|&x| snap.mark(x, a) == Some(Mark::Tail)).collect());
        }
        let separated = |x: usize| c_test.iter().all(|y| y == x || !snap.adjacent(x, y));
        for b in b_set.iter().filter(|&b| separated(b)) {
            let mut w = vec![a, b];
            w.extend(c_test.iter());
            actions.push((RuleId::R11, a, b, Mark::Tail, w));
        }
        for c in c_set.iter().filter(|&c| separated(c)) {
            let mut w = vec![a, c];
            w.extend(c_test.iter());
            actions.push((RuleId::R12, a, c, Mark::Tail, w.clone()));
            actions.push((RuleId::R12, c, a, Mark::Tail, w));
        }
    }
    let mut changed = false;
    for (rule, at, other, mark, w) in actions {
        changed |= e.set(rule, at, other, mark, &w);
    }
    changed
}

/// A discriminating path whose discriminated vertex still has a circle on
/// its edge to the path's final vertex, i.e. a place where R4 could fire.
pub fn r4_witness(g: &Pmg) -> Option<DiscriminatingPath> {
    g.discriminating_paths()
        .into_iter()
        .find(|p| g.mark(p.y(), p.v()) == Some(Mark::Circle))
}
