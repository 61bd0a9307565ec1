//! Line-oriented text format:
//!
//! ```text
//! # comment
//! nodes: a b c d
//! edge: a -> b
//! edge: a <-> c
//! edge: a o-> c
//! edge: b o-o d
//! edge: a -- d
//! ```
//!
//! The first glyph character is the mark at the left vertex (`-` tail, `<`
//! arrowhead, `o` circle), the last one the mark at the right vertex (`-`,
//! `>`, `o`); everything in between must be `-`.

use std::fmt;
use std::str::FromStr;

use super::{GraphError, Mark, Pmg};

pub(crate) fn glyph(left: Mark, right: Mark) -> &'static str {
    use Mark::*;
    match (left, right) {
        (Tail, Arrow) => "->",
        (Arrow, Tail) => "<-",
        (Arrow, Arrow) => "<->",
        (Tail, Tail) => "--",
        (Circle, Arrow) => "o->",
        (Arrow, Circle) => "<-o",
        (Circle, Circle) => "o-o",
        (Circle, Tail) => "o--",
        (Tail, Circle) => "--o",
    }
}

fn parse_glyph(token: &str) -> Option<(Mark, Mark)> {
    let bytes = token.as_bytes();
    if bytes.len() < 2 {
        return None;
    }
    let left = match bytes[0] {
        b'-' => Mark::Tail,
        b'<' => Mark::Arrow,
        b'o' => Mark::Circle,
        _ => return None,
    };
    let right = match bytes[bytes.len() - 1] {
        b'-' => Mark::Tail,
        b'>' => Mark::Arrow,
        b'o' => Mark::Circle,
        _ => return None,
    };
    if bytes[1..bytes.len() - 1].iter().any(|&c| c != b'-') {
        return None;
    }
    // "o" alone or "<>" style tokens without a shaft are rejected
    if bytes.len() == 2 && left != Mark::Tail && right != Mark::Tail {
        return None;
    }
    Some((left, right))
}

/// Parses the text graph format into a [`Pmg`].
pub fn parse_graph(input: &str) -> Result<Pmg, GraphError> {
    let mut names: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, String, String, Mark, Mark)> = Vec::new();
    let err = |line: usize, message: String| GraphError::Parse { line, message };

    for (i, raw) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected `nodes:` or `edge:`, got `{line}`")))?;
        match key.trim() {
            "nodes" => names.extend(rest.split_whitespace().map(str::to_string)),
            "edge" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                let [u, g, v] = parts[..] else {
                    return Err(err(line_no, format!("malformed edge `{}`", rest.trim())));
                };
                let (mu, mv) = parse_glyph(g).ok_or_else(|| err(line_no, format!("unknown edge glyph `{g}`")))?;
                edges.push((line_no, u.to_string(), v.to_string(), mu, mv));
            }
            other => return Err(err(line_no, format!("unknown statement `{other}`"))),
        }
    }

    let mut g = Pmg::new(names)?;
    for (line_no, u, v, mu, mv) in edges {
        let ui = g.vertex(&u)?;
        let vi = g.vertex(&v)?;
        g.add_edge(ui, vi, mu, mv).map_err(|e| match e {
            GraphError::SelfLoop(_) | GraphError::DuplicateEdge(..) => err(line_no, e.to_string()),
            other => other,
        })?;
    }
    Ok(g)
}

impl FromStr for Pmg {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

impl fmt::Display for Pmg {
    /// Writes the text format: vertices in index order, edges by pair index.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nodes:")?;
        for name in self.names().iter() {
            write!(f, " {name}")?;
        }
        writeln!(f)?;
        for (u, v, mu, mv) in self.edges() {
            writeln!(f, "edge: {} {} {}", self.name(u), glyph(mu, mv), self.name(v))?;
        }
        Ok(())
    }
}

impl Pmg {
    /// Graphviz rendering; circles become `odot` arrow shapes.
    pub fn to_dot(&self) -> String {
        fn shape(m: Mark) -> &'static str {
            match m {
                Mark::Tail => "none",
                Mark::Arrow => "normal",
                Mark::Circle => "odot",
            }
        }
        let mut out = String::from("digraph G {\n");
        for name in self.names().iter() {
            out.push_str(&format!("  \"{name}\";\n"));
        }
        for (u, v, mu, mv) in self.edges() {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [dir=both, arrowtail={}, arrowhead={}];\n",
                self.name(u),
                self.name(v),
                shape(mu),
                shape(mv)
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_every_glyph() {
        let g: Pmg = "# demo\nnodes: a b c d\nedge: a -> b\nedge: a <-> c # trailing\nedge: b o-> c\nedge: c o-o d\nedge: a -- d\nedge: b <-o d\n"
            .parse()
            .unwrap();
        assert_eq!(g.edge(0, 1), Some((Mark::Tail, Mark::Arrow)));
        assert_eq!(g.edge(0, 2), Some((Mark::Arrow, Mark::Arrow)));
        assert_eq!(g.edge(1, 2), Some((Mark::Circle, Mark::Arrow)));
        assert_eq!(g.edge(2, 3), Some((Mark::Circle, Mark::Circle)));
        assert_eq!(g.edge(0, 3), Some((Mark::Tail, Mark::Tail)));
        assert_eq!(g.edge(1, 3), Some((Mark::Arrow, Mark::Circle)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_graph("nodes: a b\nedge: a -> a"),
            Err(GraphError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("nodes: a b\nedge: a -> b\nedge: b -> a"),
            Err(GraphError::Parse { line: 3, .. })
        ));
        assert!(matches!(parse_graph("nodes: a b\nedge: a -> z"), Err(GraphError::UnknownVertex(_))));
        assert!(matches!(parse_graph("nodes: a b\nedge: a => b"), Err(GraphError::Parse { .. })));
        assert!(matches!(parse_graph("nodes: a a"), Err(GraphError::DuplicateVertex(_))));
        assert!(matches!(parse_graph("vertices: a"), Err(GraphError::Parse { .. })));
    }

    fn mark() -> impl Strategy<Value = Mark> {
        prop_oneof![Just(Mark::Tail), Just(Mark::Arrow), Just(Mark::Circle)]
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(n in 1usize..7, edges in proptest::collection::vec((0usize..7, 0usize..7, mark(), mark()), 0..20)) {
            let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let mut g = Pmg::new(names).unwrap();
            for (u, v, mu, mv) in edges {
                if u < n && v < n && u != v {
                    g.set_edge(u, v, mu, mv);
                }
            }
            let back: Pmg = g.to_string().parse().unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
