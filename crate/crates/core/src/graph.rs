//! Labeled, integer-weighted digraphs and their text format.
//!
//! The line-based format:
//!
//! ```text
//! # comment
//! vertex a
//! vertex b
//! edge a b C 1
//! edge b a A 1
//! start a
//! ```
//!
//! Vertex declaration order fixes the matrix index of each vertex. Parallel
//! edges are legal and kept as given.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub init: usize,
    pub term: usize,
    pub label: String,
    pub cost: u64,
}

/// Result of [`ChannelGraph::trim_to_recurrent`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed {
    pub graph: ChannelGraph,
    /// Original indices of the kept vertices, increasing.
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Variable-length capacity of the kept component.
    pub capacity: f64,
}

/// A costly constrained channel: vertices, labeled edges with nonnegative
/// integer costs and an optional start vertex. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    start: Option<usize>,
}

impl ChannelGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>, start: Option<usize>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(vertices.len());
        for (i, name) in vertices.iter().enumerate() {
            if !is_token(name) {
                return Err(Error::Graph(format!("invalid vertex name {name:?}")));
            }
            if seen.insert(name.as_str(), i).is_some() {
                return Err(Error::Graph(format!("duplicate vertex {name}")));
            }
        }
        let n = vertices.len();
        for e in &edges {
            if e.init >= n || e.term >= n {
                return Err(Error::Graph(format!(
                    "edge {}->{} references a missing vertex",
                    e.init, e.term
                )));
            }
            if !is_token(&e.label) {
                return Err(Error::Graph(format!("invalid label {:?}", e.label)));
            }
        }
        if let Some(s) = start {
            if s >= n {
                return Err(Error::Graph(format!("start index {s} out of range")));
            }
        }
        Ok(Self {
            vertices,
            edges,
            start,
        })
    }

    /// Convenience constructor from `(from, to, label, cost)` tuples using
    /// vertex names.
    pub fn from_named_edges(
        vertices: &[&str],
        edges: &[(&str, &str, &str, u64)],
        start: Option<&str>,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Graph(format!("unknown vertex {name}")))
        };
        let edges = edges
            .iter()
            .map(|&(a, b, label, cost)| {
                Ok(Edge {
                    init: lookup(a)?,
                    term: lookup(b)?,
                    label: label.to_string(),
                    cost,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let start = start.map(lookup).transpose()?;
        Self::new(
            vertices.iter().map(|v| v.to_string()).collect(),
            edges,
            start,
        )
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> Option<usize> {
        self.start
    }

    pub fn with_start(mut self, start: Option<usize>) -> Result<Self> {
        if let Some(s) = start {
            if s >= self.vertices.len() {
                return Err(Error::Graph(format!("start index {s} out of range")));
            }
        }
        self.start = start;
        Ok(self)
    }

    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.edges.iter().map(|e| e.label.as_str()).collect()
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.init == v)
    }

    pub fn max_cost(&self) -> u64 {
        self.edges.iter().map(|e| e.cost).max().unwrap_or(0)
    }

    /// Outgoing adjacency lists of edge indices.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.init].push(i);
        }
        adj
    }

    /// True iff no vertex has two outgoing edges with the same label.
    pub fn is_deterministic(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .all(|e| seen.insert((e.init, e.label.as_str())))
    }

    /// Strongly connected components, each sorted, ordered by their smallest
    /// vertex index.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut comps = tarjan(self.vertices.len(), &self.adjacency_vertices());
        for c in &mut comps {
            c.sort_unstable();
        }
        comps.sort_unstable_by_key(|c| c[0]);
        comps
    }

    /// A graph with a single vertex counts as strongly connected whether or
    /// not it carries a self-loop. The empty graph does not.
    pub fn is_strongly_connected(&self) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => true,
            _ => self.strongly_connected_components().len() == 1,
        }
    }

    /// Vertices reachable from `from` (including `from`).
    pub fn reachable_from(&self, from: usize) -> Vec<bool> {
        let adj = self.adjacency_vertices();
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    /// Subgraph induced by `keep` (vertex order follows `keep`). The start
    /// vertex survives only if it is kept.
    pub fn induced_subgraph(&self, keep: &[usize]) -> ChannelGraph {
        let mut map = vec![usize::MAX; self.vertices.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| map[e.init] != usize::MAX && map[e.term] != usize::MAX)
            .map(|e| Edge {
                init: map[e.init],
                term: map[e.term],
                label: e.label.clone(),
                cost: e.cost,
            })
            .collect();
        let start = self
            .start
            .and_then(|s| (map[s] != usize::MAX).then_some(map[s]));
        ChannelGraph {
            vertices: keep.iter().map(|&v| self.vertices[v].clone()).collect(),
            edges,
            start,
        }
    }

    /// Restricts to the recurrent part reachable from `start`: among the
    /// reachable strongly connected components that contain a cycle, keeps
    /// the one of largest variable-length capacity (a component with a
    /// zero-cost cycle counts as infinite), ties going to the component with
    /// the smallest vertex index.
    pub fn trim_to_recurrent(&self, start: usize) -> Result<Trimmed> {
        if start >= self.vertices.len() {
            return Err(Error::Graph(format!("start vertex {start} out of range")));
        }
        let reach = self.reachable_from(start);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for comp in self.strongly_connected_components() {
            if !reach[comp[0]] {
                continue;
            }
            let sub = self.induced_subgraph(&comp);
            if sub.edges.is_empty() {
                continue;
            }
            let cap = if crate::structure::has_zero_cost_cycle(&sub) {
                f64::INFINITY
            } else {
                crate::capacity::variable_length_capacity(&sub)?.capacity
            };
            if best.as_ref().is_none_or(|(b, _)| cap > b + 1e-12) {
                best = Some((cap, comp));
            }
        }
        let (capacity, kept) =
            best.ok_or_else(|| Error::Graph("no recurrent behavior reachable from start".into()))?;
        let discarded = (0..self.vertices.len())
            .filter(|v| kept.binary_search(v).is_err())
            .collect();
        Ok(Trimmed {
            graph: self.induced_subgraph(&kept),
            kept,
            discarded,
            capacity,
        })
    }

    fn adjacency_vertices(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            adj[e.init].push(e.term);
        }
        adj
    }

    /// Serializes to the line-based graph format.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

fn tarjan(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (vertex, position in its adjacency list)
        let mut call = vec![(root, 0usize)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

impl fmt::Display for ChannelGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            writeln!(f, "vertex {v}")?;
        }
        for e in &self.edges {
            writeln!(
                f,
                "edge {} {} {} {}",
                self.vertices[e.init], self.vertices[e.term], e.label, e.cost
            )?;
        }
        if let Some(s) = self.start {
            writeln!(f, "start {}", self.vertices[s])?;
        }
        Ok(())
    }
}

impl FromStr for ChannelGraph {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        parse_graph(text)
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == '#')
}

/// Parses the line-based graph format. Errors carry the 1-based line number.
pub fn parse_graph(text: &str) -> Result<ChannelGraph> {
    let mut vertices: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut start = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "vertex" => {
                let [_, name] = tokens[..] else {
                    return Err(err(format!("expected `vertex <name>`, got {line:?}")));
                };
                if index.contains_key(name) {
                    return Err(err(format!("duplicate vertex {name}")));
                }
                index.insert(name.to_string(), vertices.len());
                vertices.push(name.to_string());
            }
            "edge" => {
                let [_, from, to, label, cost] = tokens[..] else {
                    return Err(err(format!(
                        "expected `edge <from> <to> <label> <cost>`, got {line:?}"
                    )));
                };
                let lookup = |name: &str| {
                    index
                        .get(name)
                        .copied()
                        .ok_or_else(|| err(format!("unknown vertex {name}")))
                };
                let init = lookup(from)?;
                let term = lookup(to)?;
                if cost.starts_with('-') {
                    return Err(err(format!("negative cost {cost}")));
                }
                let cost: u64 = cost
                    .parse()
                    .map_err(|_| err(format!("invalid cost {cost:?}")))?;
                edges.push(Edge {
                    init,
                    term,
                    label: label.to_string(),
                    cost,
                });
            }
            "start" => {
                let [_, name] = tokens[..] else {
                    return Err(err(format!("expected `start <name>`, got {line:?}")));
                };
                if start.is_some() {
                    return Err(err("start declared twice".into()));
                }
                start = Some(
                    index
                        .get(name)
                        .copied()
                        .ok_or_else(|| err(format!("unknown vertex {name}")))?,
                );
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    ChannelGraph::new(vertices, edges, start)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> ChannelGraph {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges = (0..n)
            .map(|i| Edge {
                init: i,
                term: (i + 1) % n,
                label: "a".into(),
                cost: 1,
            })
            .collect();
        ChannelGraph::new(names, edges, Some(0)).unwrap()
    }

    #[test]
    fn parses_two_vertex_example() {
        let g =
            parse_graph("vertex a\nvertex b\nedge a b C 1\nedge b a A 1\nedge a a A 2\n").unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges().len(), 3);
        assert_eq!(
            g.edges()[2],
            Edge {
                init: 0,
                term: 0,
                label: "A".into(),
                cost: 2
            }
        );
        assert!(g.is_deterministic());
    }

    #[test]
    fn single_vertex_without_edges() {
        let g = parse_graph("# lonely\nvertex a\n").unwrap();
        assert_eq!(g.num_vertices(), 1);
        assert!(g.edges().is_empty());
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = parse_graph("vertex a\nvertex b\nedge a b C -1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_graph("vertex a\nedge a z C 1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_graph("vertex a\nvertex a\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_graph("vertex a\nedge a a C one\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_graph("vertex a\nedge a a C\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_graph("node a\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn nondeterminism_detected() {
        let g =
            ChannelGraph::from_named_edges(&["a"], &[("a", "a", "A", 1), ("a", "a", "A", 2)], None)
                .unwrap();
        assert!(!g.is_deterministic());
        let g =
            ChannelGraph::from_named_edges(&["a"], &[("a", "a", "A", 1), ("a", "a", "C", 2)], None)
                .unwrap();
        assert!(g.is_deterministic());
    }

    #[test]
    fn connectivity() {
        assert!(cycle(2).is_strongly_connected());
        assert!(cycle(5).is_strongly_connected());
        let path = ChannelGraph::from_named_edges(
            &["a", "b", "c"],
            &[("a", "b", "x", 1), ("b", "c", "x", 1)],
            None,
        )
        .unwrap();
        assert!(!path.is_strongly_connected());
        assert_eq!(path.strongly_connected_components().len(), 3);
    }

    #[test]
    fn serializer_emits_declaration_order() {
        let text = "vertex b\nvertex a\nedge b a X 3\nedge a b Y 0\nstart a\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(g.to_text(), text);
    }

    #[test]
    fn induced_subgraph_drops_outside_edges() {
        let g = cycle(3);
        let sub = g.induced_subgraph(&[0, 1]);
        assert_eq!(sub.edges().len(), 1);
        assert_eq!(sub.start(), Some(0));
        let sub = g.induced_subgraph(&[2, 1]);
        assert_eq!(sub.start(), None);
        assert_eq!(sub.edges()[0].init, 1);
        assert_eq!(sub.edges()[0].term, 0);
    }

    #[test]
    fn trim_keeps_dominant_component() {
        let c = cycle(3);
        let t = c.trim_to_recurrent(0).unwrap();
        assert_eq!(t.graph, c);
        assert!(t.discarded.is_empty());

        // s -> {x: loops 1,2 (0.694 bits)} and s -> {y: loop 2,2 (0.5 bits)}
        let g = ChannelGraph::from_named_edges(
            &["s", "y", "x"],
            &[
                ("s", "y", "a", 1),
                ("s", "x", "b", 1),
                ("x", "x", "a", 1),
                ("x", "x", "b", 2),
                ("y", "y", "a", 2),
                ("y", "y", "b", 2),
            ],
            Some("s"),
        )
        .unwrap();
        let t = g.trim_to_recurrent(0).unwrap();
        assert_eq!(t.kept, vec![2]);
        assert_eq!(t.discarded, vec![0, 1]);
        assert!((t.capacity - 0.6942419136306174).abs() < 1e-12);
        assert!(t.graph.is_strongly_connected());

        let path =
            ChannelGraph::from_named_edges(&["a", "b"], &[("a", "b", "x", 1)], None).unwrap();
        assert!(matches!(path.trim_to_recurrent(0), Err(Error::Graph(_))));
    }
}
