use super::{Mark, Pmg};
use crate::vertex_set::VertexSet;

/// A path `<a, z1, .., zm, u, Y, v>` where `a` and `v` are non-adjacent and
/// every vertex strictly between `a` and `Y` is a collider on the path and a
/// parent of `v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiscriminatingPath {
    /// Vertices from the endpoint `a` to `v`; at least four of them.
    pub vertices: Vec<usize>,
}

impl DiscriminatingPath {
    pub fn endpoint(&self) -> usize {
        self.vertices[0]
    }

    pub fn v(&self) -> usize {
        *self.vertices.last().unwrap()
    }

    /// The vertex being discriminated.
    pub fn y(&self) -> usize {
        self.vertices[self.vertices.len() - 2]
    }

    pub fn u(&self) -> usize {
        self.vertices[self.vertices.len() - 3]
    }

    /// Whether `Y` is a collider on the path in `g`.
    pub fn y_is_collider(&self, g: &Pmg) -> bool {
        let (u, y, v) = (self.u(), self.y(), self.v());
        g.mark(y, u) == Some(Mark::Arrow) && g.mark(y, v) == Some(Mark::Arrow)
    }

    /// Whether the same vertex sequence is a discriminating path in `g`.
    pub fn holds_in(&self, g: &Pmg) -> bool {
        let p = &self.vertices;
        let v = self.v();
        if p.len() < 4 || g.adjacent(p[0], v) {
            return false;
        }
        if p.windows(2).any(|w| !g.adjacent(w[0], w[1])) {
            return false;
        }
        let parents_v = g.parents(v);
        (1..p.len() - 2).all(|i| {
            let z = p[i];
            parents_v.contains(z) && g.mark(z, p[i - 1]) == Some(Mark::Arrow) && g.mark(z, p[i + 1]) == Some(Mark::Arrow)
        })
    }
}

pub(super) fn discriminating_paths(g: &Pmg) -> Vec<DiscriminatingPath> {
    let mut out = Vec::new();
    for v in 0..g.n() {
        let parents_v = g.parents(v);
        for y in g.neighbors(v) {
            for u in parents_v.intersection(g.neighbors(y)) {
                if g.mark(u, y) != Some(Mark::Arrow) {
                    continue;
                }
                // reversed path: v, y, u, ...
                let mut rev = vec![v, y, u];
                let on_path = VertexSet::from_iter([v, y, u]);
                extend(g, v, parents_v, &mut rev, on_path, &mut out);
            }
        }
    }
    out
}

/// `rev` ends with a vertex that already has an arrowhead towards the `Y` side;
/// look for a predecessor that also puts an arrowhead at it.
fn extend(
    g: &Pmg,
    v: usize,
    parents_v: VertexSet,
    rev: &mut Vec<usize>,
    on_path: VertexSet,
    out: &mut Vec<DiscriminatingPath>,
) {
    let current = *rev.last().unwrap();
    for w in g.arrows_at(current).difference(on_path) {
        if !g.adjacent(w, v) {
            let mut vertices = rev.clone();
            vertices.push(w);
            vertices.reverse();
            out.push(DiscriminatingPath { vertices });
        } else if parents_v.contains(w) && g.mark(w, current) == Some(Mark::Arrow) {
            rev.push(w);
            extend(g, v, parents_v, rev, on_path.with(w), out);
            rev.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_textbook_discriminating_path() {
        // a -> u <-> y, u -> v, y -> v, a and v non-adjacent
        let g: Pmg = "nodes: a u y v\nedge: a -> u\nedge: u <-> y\nedge: u -> v\nedge: y -> v\n"
            .parse()
            .unwrap();
        let paths = g.discriminating_paths();
        assert_eq!(paths.len(), 1);
        let p = &paths[0];
        assert_eq!(p.vertices, vec![0, 1, 2, 3]);
        assert!(!p.y_is_collider(&g));
        assert!(p.holds_in(&g));
    }

    #[test]
    fn longer_path_through_collider_parents() {
        // a -> z <-> u <-> y, z -> v, u -> v, y <-> v
        let g: Pmg = "nodes: a z u y v\nedge: a -> z\nedge: z <-> u\nedge: u <-> y\nedge: z -> v\nedge: u -> v\nedge: y <-> v\n"
            .parse()
            .unwrap();
        let paths = g.discriminating_paths();
        assert!(paths.iter().any(|p| p.vertices == vec![0, 1, 2, 3, 4]));
        let p = paths.iter().find(|p| p.vertices.len() == 5).unwrap();
        assert!(p.y_is_collider(&g));
    }
}
