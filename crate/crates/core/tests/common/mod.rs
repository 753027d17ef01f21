#![allow(dead_code)]

use std::collections::BTreeSet;

use costcap::graph::ChannelGraph;
use costcap::synthesis::{builtin_constraint, period_alphabet, periodic_subsequence_graph};

pub const PERIODS: [&str; 4] = ["AC", "ACG", "ACGT", "AAC"];

pub fn data(name: &str) -> ChannelGraph {
    let path = format!("{}/data/{name}.graph", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    costcap::parse_graph(&text).unwrap()
}

/// Graph on `v1..vn` from `(from, to, cost)` triples with distinct labels per vertex.
pub fn numbered(n: usize, edges: &[(usize, usize, u64)]) -> ChannelGraph {
    let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut used = vec![0usize; n];
    let labels: Vec<String> = edges
        .iter()
        .map(|&(u, _, _)| {
            used[u] += 1;
            ((b'a' + used[u] as u8 - 1) as char).to_string()
        })
        .collect();
    let es: Vec<(&str, &str, &str, u64)> = edges
        .iter()
        .zip(&labels)
        .map(|(&(u, v, w), l)| (refs[u], refs[v], l.as_str(), w))
        .collect();
    ChannelGraph::from_named_edges(&refs, &es, Some(refs[0])).unwrap()
}

pub fn fig_a() -> ChannelGraph {
    numbered(2, &[(0, 0, 1), (0, 1, 1), (1, 0, 1)])
}

pub fn fig_b() -> ChannelGraph {
    numbered(2, &[(0, 0, 2), (0, 1, 1), (1, 0, 1)])
}

pub fn fig_c() -> ChannelGraph {
    numbered(2, &[(0, 0, 2), (0, 1, 1), (1, 0, 3), (1, 1, 2)])
}

pub fn fig_d() -> ChannelGraph {
    numbered(2, &[(0, 0, 2), (0, 1, 1), (1, 0, 1), (1, 1, 2)])
}

pub fn fig_e() -> ChannelGraph {
    numbered(3, &[(0, 1, 1), (1, 0, 1), (1, 2, 2), (2, 1, 3)])
}

pub fn g_of(r: &str) -> ChannelGraph {
    periodic_subsequence_graph(r).unwrap()
}

pub fn min_run_tt(r: &str) -> ChannelGraph {
    builtin_constraint("min-run:T:2", &period_alphabet(r)).unwrap()
}

/// Strongly connected graphs without zero-cost cycles.
pub fn positive_cost_graphs() -> Vec<(String, ChannelGraph)> {
    let mut out: Vec<(String, ChannelGraph)> = vec![
        ("fig_a".into(), fig_a()),
        ("fig_b".into(), fig_b()),
        ("fig_c".into(), fig_c()),
        ("fig_d".into(), fig_d()),
        ("fig_e".into(), fig_e()),
        ("alternating".into(), data("alternating")),
        ("telegraph".into(), data("telegraph")),
    ];
    for r in PERIODS {
        out.push((format!("G({r})"), g_of(r)));
    }
    out
}

/// All words of paths from `v` with total cost at most `t`.
pub fn words_within(g: &ChannelGraph, v: usize, t: u64) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![(v, 0u64, String::new())];
    while let Some((u, cost, w)) = stack.pop() {
        out.insert(w.clone());
        for e in g.out_edges(u) {
            if cost + e.cost <= t {
                stack.push((e.term, cost + e.cost, format!("{w}{}", e.label)));
            }
        }
    }
    out
}

/// Whether some path from `v` spells `word` (single-character labels).
pub fn accepts(g: &ChannelGraph, v: usize, word: &str) -> bool {
    let mut states: BTreeSet<usize> = [v].into();
    for ch in word.chars() {
        let mut next = BTreeSet::new();
        for &u in &states {
            for e in g.out_edges(u) {
                if e.label.len() == 1 && e.label.starts_with(ch) {
                    next.insert(e.term);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        states = next;
    }
    true
}
