//! Period, cost-period and coboundary decomposition of strongly connected
//! channel graphs.
//!
//! Every closed walk of length `m` and cost `w` contributes the lattice
//! vector `(m, w)`. Measuring each edge against a spanning arborescence
//! gives a finite generating set of this lattice; its Hermite normal form
//! `{(d, e₀), (0, c)}` carries the period `d`, the cost-period `c` and the
//! slope `b = e₀ / d`. All arithmetic is exact.

use std::collections::{BTreeMap, VecDeque};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::ChannelGraph;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub deterministic: bool,
    pub strongly_connected: bool,
    /// Period `d` (gcd of cycle lengths).
    pub period: u64,
    /// Largest cost-period `c`; 0 means cost-uniform.
    pub cost_period: u64,
    pub b: Rational,
    /// `B(v)`, reduced to `[0, c)` when `c > 0`. `B(v₀) = 0`.
    pub potentials: Vec<Rational>,
    pub cost_diverse: bool,
    /// Residue of the tree depth of each vertex modulo `d`.
    pub cyclic_class: Vec<u64>,
    pub zero_cost_cycle: bool,
}

/// `(g, s, t)` with `s·a + t·b = g = gcd(a, b) ≥ 0`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Hermite basis `{(d, e), (0, c)}` of a lattice in ℤ², built incrementally.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Hermite2 {
    d: i64,
    e: i64,
    c: i64,
}

impl Hermite2 {
    fn add(&mut self, x: i64, y: i64) {
        if x == 0 {
            self.c = self.c.gcd(&y);
        } else {
            let (g, s, t) = ext_gcd(self.d, x);
            // Determinant-one change of basis keeps the lattice fixed.
            let killed = (x / g) * self.e - (self.d / g) * y;
            self.e = s * self.e + t * y;
            self.d = g;
            self.c = self.c.gcd(&killed);
        }
        if self.c != 0 {
            self.e = self.e.rem_euclid(self.c);
        }
    }
}

/// Breadth-first arborescence from `root`: `(depth, cost)` per vertex.
fn tree_labels(g: &ChannelGraph, root: usize) -> Vec<Option<(i64, i64)>> {
    let mut lab = vec![None; g.num_vertices()];
    lab[root] = Some((0, 0));
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let (lu, cu) = lab[u].unwrap();
        for e in g.out_edges(u) {
            if lab[e.term].is_none() {
                lab[e.term] = Some((lu + 1, cu + e.cost as i64));
                queue.push_back(e.term);
            }
        }
    }
    lab
}

/// Period, cost-period and coboundary data of a strongly connected graph.
pub fn analyze_structure(g: &ChannelGraph) -> Result<StructureReport> {
    if !g.is_strongly_connected() {
        return Err(Error::Structure("graph is not strongly connected".into()));
    }
    if g.edges().is_empty() {
        return Err(Error::Structure("graph has no cycles".into()));
    }
    let lab: Vec<(i64, i64)> = tree_labels(g, 0).into_iter().map(Option::unwrap).collect();
    let mut h = Hermite2::default();
    for e in g.edges() {
        let (lu, cu) = lab[e.init];
        let (lv, cv) = lab[e.term];
        h.add(lu + 1 - lv, cu + e.cost as i64 - cv);
    }
    let d = h.d;
    let c = h.c;
    let b = Rational::new(h.e, d);
    let potentials = lab
        .iter()
        .map(|&(len, cost)| reduce_mod(Rational::from_integer(cost) - b * len, c))
        .collect();
    let cyclic_class = lab
        .iter()
        .map(|&(len, _)| len.rem_euclid(d) as u64)
        .collect();
    Ok(StructureReport {
        deterministic: g.is_deterministic(),
        strongly_connected: true,
        period: d as u64,
        cost_period: c as u64,
        b,
        potentials,
        cost_diverse: c > 0,
        cyclic_class,
        zero_cost_cycle: has_zero_cost_cycle(g),
    })
}

/// Representative of `r` in `[0, c)`; `r` itself when `c = 0`.
fn reduce_mod(r: Rational, c: i64) -> Rational {
    if c == 0 {
        return r;
    }
    let cr = Rational::from_integer(c);
    let q = (r / cr).floor();
    r - q * cr
}

fn is_multiple(r: Rational, c: u64) -> bool {
    if c == 0 {
        r.is_zero()
    } else {
        r.is_integer() && r.to_integer().rem_euclid(c as i64) == 0
    }
}

/// Checks `τ(e) ≡ b + B(term) − B(init)` (mod `c`, exactly when `c = 0`)
/// for every edge.
pub fn verify_coboundary(g: &ChannelGraph, report: &StructureReport) -> bool {
    if report.potentials.len() != g.num_vertices() {
        return false;
    }
    g.edges().iter().all(|e| {
        let lhs = Rational::from_integer(e.cost as i64);
        let rhs = report.b + report.potentials[e.term] - report.potentials[e.init];
        is_multiple(lhs - rhs, report.cost_period)
    })
}

/// True when the zero-cost edges contain a directed cycle.
pub fn has_zero_cost_cycle(g: &ChannelGraph) -> bool {
    let n = g.num_vertices();
    let mut indeg = vec![0usize; n];
    let zero: Vec<_> = g.edges().iter().filter(|e| e.cost == 0).collect();
    for e in &zero {
        indeg[e.term] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(u) = stack.pop() {
        removed += 1;
        for e in zero.iter().filter(|e| e.init == u) {
            indeg[e.term] -= 1;
            if indeg[e.term] == 0 {
                stack.push(e.term);
            }
        }
    }
    removed < n
}

/// Two paths with equal endpoints and length but different cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiversityWitness {
    pub from: usize,
    pub to: usize,
    pub length: usize,
    /// Edge indices of each path.
    pub paths: [Vec<usize>; 2],
    pub costs: [u64; 2],
}

/// Brute-force search for equal-length, equal-endpoint paths of different
/// cost up to length `max_len`.
pub fn cost_diversity_oracle(g: &ChannelGraph, max_len: usize) -> (bool, Option<DiversityWitness>) {
    let n = g.num_vertices();
    // layer[i][j]: cost -> one path from i to j of the current length
    let mut layer: Vec<Vec<BTreeMap<u64, Vec<usize>>>> = vec![vec![BTreeMap::new(); n]; n];
    for (k, e) in g.edges().iter().enumerate() {
        layer[e.init][e.term]
            .entry(e.cost)
            .or_insert_with(|| vec![k]);
    }
    for len in 1..=max_len {
        if len > 1 {
            let mut next = vec![vec![BTreeMap::new(); n]; n];
            for (i, row) in layer.iter().enumerate() {
                for paths in row.iter() {
                    for (&w, p) in paths {
                        let last = g.edges()[*p.last().unwrap()].term;
                        for (k, e) in g.edges().iter().enumerate().filter(|(_, e)| e.init == last) {
                            next[i][e.term].entry(w + e.cost).or_insert_with(|| {
                                let mut q = p.clone();
                                q.push(k);
                                q
                            });
                        }
                    }
                }
            }
            layer = next;
        }
        for (i, row) in layer.iter().enumerate() {
            for (j, paths) in row.iter().enumerate() {
                if paths.len() >= 2 {
                    let mut it = paths.iter();
                    let (w0, p0) = it.next().unwrap();
                    let (w1, p1) = it.next().unwrap();
                    return (
                        true,
                        Some(DiversityWitness {
                            from: i,
                            to: j,
                            length: len,
                            paths: [p0.clone(), p1.clone()],
                            costs: [*w0, *w1],
                        }),
                    );
                }
            }
        }
    }
    (false, None)
}

impl StructureReport {
    /// `B(v)` as a float.
    pub fn potential_f64(&self, v: usize) -> f64 {
        let r = self.potentials[v];
        *r.numer() as f64 / *r.denom() as f64
    }

    pub fn b_f64(&self) -> f64 {
        *self.b.numer() as f64 / *self.b.denom() as f64
    }
}

/// `num/den` formatting used in reports.
pub fn format_rational(r: &Rational) -> String {
    let r = if r.denom().is_negative() { -*r } else { *r };
    format!("{}/{}", r.numer(), r.denom())
}
