//! DNA synthesis channels: periodic subsequence graphs, label products with
//! constraint graphs and synthesis capacities.
//!
//! The periodic subsequence graph `G(r)` of a period `r = r_1 … r_M` has one
//! vertex per position. From `v_i` there is one edge per distinct symbol
//! `s`, leading to the next position `j` (cyclically, strictly after `i`)
//! with `r_j = s`; its cost is the cyclic distance from `i` to `j`, in
//! `1..=M`. Starting from `v_M`, the cost-`t` follower set is exactly the
//! set of subsequences of the first `t` symbols of `rrr…`.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::capacity::{binary_entropy, CapacityModel, FixedLengthCapacity, Regime};
use crate::error::{Error, Result};
use crate::graph::{ChannelGraph, Edge};
use crate::par::{self, Execution};

/// Period string plus optional constraint graph (with a start vertex).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    pub period: String,
    pub constraint: Option<ChannelGraph>,
}

impl SynthesisSpec {
    pub fn new(period: &str, constraint: Option<ChannelGraph>) -> Result<Self> {
        validate_period(period)?;
        if let Some(c) = &constraint {
            if c.start().is_none() {
                return Err(Error::Synthesis(
                    "constraint graph needs a start vertex".into(),
                ));
            }
        }
        Ok(Self {
            period: period.to_string(),
            constraint,
        })
    }

    pub fn unconstrained(period: &str) -> Result<Self> {
        Self::new(period, None)
    }
}

fn validate_period(r: &str) -> Result<Vec<char>> {
    let symbols: Vec<char> = r.chars().collect();
    if symbols.len() < 2 {
        return Err(Error::Synthesis(format!(
            "period {r:?} must have length at least 2"
        )));
    }
    if symbols.iter().any(|c| c.is_whitespace()) {
        return Err(Error::Synthesis(
            "period symbols must not be whitespace".into(),
        ));
    }
    let distinct: BTreeSet<char> = symbols.iter().copied().collect();
    if distinct.len() < 2 {
        return Err(Error::Synthesis(format!(
            "period {r:?} must contain at least two distinct symbols"
        )));
    }
    Ok(symbols)
}

/// `G(r)` with start vertex `v_M`. A vertex is named after its symbol when
/// that symbol occurs once in `r`, otherwise symbol and 1-based position.
pub fn periodic_subsequence_graph(r: &str) -> Result<ChannelGraph> {
    let sym = validate_period(r)?;
    let m = sym.len();
    let names: Vec<String> = (0..m)
        .map(|i| {
            if sym.iter().filter(|&&c| c == sym[i]).count() == 1 {
                sym[i].to_string()
            } else {
                format!("{}{}", sym[i], i + 1)
            }
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..m {
        let mut seen = BTreeSet::new();
        for dist in 1..=m {
            let j = (i + dist) % m;
            if seen.insert(sym[j]) {
                edges.push(Edge {
                    init: i,
                    term: j,
                    label: sym[j].to_string(),
                    cost: dist as u64,
                });
            }
        }
    }
    ChannelGraph::new(names, edges, Some(m - 1))
}

/// Distinct subsequences of `s` (including the empty word), of length `n`
/// if given. Linear-time DP per length.
pub fn finite_subsequence_oracle(s: &str, n: Option<usize>) -> BigUint {
    let sym: Vec<char> = s.chars().collect();
    let len = sym.len();
    // dp[k]: distinct subsequences of length k of the current prefix
    let mut dp = vec![BigUint::zero(); len + 1];
    dp[0] = BigUint::one();
    let mut last: std::collections::HashMap<char, Vec<BigUint>> = Default::default();
    for &c in &sym {
        let before = dp.clone();
        for k in (1..=len).rev() {
            let add = &before[k - 1];
            let dup = last.get(&c).map(|l| &l[k - 1]);
            let mut v = &dp[k] + add;
            if let Some(d) = dup {
                v -= d;
            }
            dp[k] = v;
        }
        last.insert(c, before);
    }
    match n {
        Some(k) if k > len => BigUint::zero(),
        Some(k) => dp[k].clone(),
        None => dp.iter().sum(),
    }
}

/// Exhaustive enumeration of distinct subsequences; exponential, `|s| ≤ 25`.
pub fn brute_force_subsequences(s: &str, n: Option<usize>) -> Result<u64> {
    let sym: Vec<char> = s.chars().collect();
    if sym.len() > 25 {
        return Err(Error::Synthesis("brute force limited to 25 symbols".into()));
    }
    let mut set = HashSet::new();
    for mask in 0u32..(1 << sym.len()) {
        if n.is_some_and(|k| mask.count_ones() as usize != k) {
            continue;
        }
        let w: String = (0..sym.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| sym[i])
            .collect();
        set.insert(w);
    }
    Ok(set.len() as u64)
}

/// The first `t` symbols of `rrr…`.
pub fn periodic_prefix(r: &str, t: usize) -> String {
    r.chars().cycle().take(t).collect()
}

/// Synchronized product: vertices `(a,b)`, one edge per pair of equally
/// labeled edges, cost taken from `g1`.
pub fn label_product(g1: &ChannelGraph, g2: &ChannelGraph) -> ChannelGraph {
    let n2 = g2.num_vertices();
    let names: Vec<String> = g1
        .vertices()
        .iter()
        .flat_map(|a| g2.vertices().iter().map(move |b| format!("({a},{b})")))
        .collect();
    let mut edges = Vec::new();
    for u1 in 0..g1.num_vertices() {
        for u2 in 0..n2 {
            for e1 in g1.out_edges(u1) {
                for e2 in g2.out_edges(u2).filter(|e2| e2.label == e1.label) {
                    edges.push(Edge {
                        init: u1 * n2 + u2,
                        term: e1.term * n2 + e2.term,
                        label: e1.label.clone(),
                        cost: e1.cost,
                    });
                }
            }
        }
    }
    let start = match (g1.start(), g2.start()) {
        (Some(a), Some(b)) => Some(a * n2 + b),
        _ => None,
    };
    ChannelGraph::new(names, edges, start).expect("product of valid graphs is valid")
}

/// Symbols common to both alphabets.
pub fn shared_alphabet<'a>(g1: &'a ChannelGraph, g2: &ChannelGraph) -> BTreeSet<&'a str> {
    let other = g2.alphabet();
    g1.alphabet()
        .into_iter()
        .filter(|s| other.contains(s))
        .collect()
}

/// Run-length constraint graphs over `alphabet` (extended by the
/// constrained symbol if needed).
///
/// * `max-run:S:k`: runs of `S` have length at most `k`;
/// * `min-run:S:k`: every run of `S` has length at least `k` (a run still
///   in progress may be shorter);
/// * `identity`: no constraint.
///
/// All edges have cost 0; the start vertex is the empty-history state.
pub fn builtin_constraint(spec: &str, alphabet: &[String]) -> Result<ChannelGraph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse_k = |s: &str| -> Result<usize> {
        s.parse::<usize>().ok().filter(|&k| k >= 1).ok_or_else(|| {
            Error::Synthesis(format!("run length must be a positive integer, got {s:?}"))
        })
    };
    let edge = |i: usize, j: usize, l: &str| Edge {
        init: i,
        term: j,
        label: l.to_string(),
        cost: 0,
    };
    match parts.as_slice() {
        ["identity"] => {
            let edges = alphabet.iter().map(|a| edge(0, 0, a)).collect();
            ChannelGraph::new(vec!["s".into()], edges, Some(0))
        }
        ["max-run", sym, k] => {
            let k = parse_k(k)?;
            let alphabet = with_symbol(sym, alphabet);
            let names = (0..=k).map(|i| format!("r{i}")).collect();
            let mut edges = Vec::new();
            for i in 0..=k {
                for a in &alphabet {
                    if a == sym {
                        if i < k {
                            edges.push(edge(i, i + 1, a));
                        }
                    } else {
                        edges.push(edge(i, 0, a));
                    }
                }
            }
            ChannelGraph::new(names, edges, Some(0))
        }
        ["min-run", sym, k] => {
            let k = parse_k(k)?;
            let alphabet = with_symbol(sym, alphabet);
            let names = (0..=k).map(|i| format!("r{i}")).collect();
            let mut edges = Vec::new();
            for i in 0..=k {
                for a in &alphabet {
                    if a == sym {
                        edges.push(edge(i, (i + 1).min(k), a));
                    } else if i == 0 || i == k {
                        edges.push(edge(i, 0, a));
                    }
                }
            }
            ChannelGraph::new(names, edges, Some(0))
        }
        _ => Err(Error::Synthesis(format!(
            "unknown constraint {spec:?}; expected identity, max-run:S:k or min-run:S:k"
        ))),
    }
}

/// `alphabet` with `sym` added, sorted.
fn with_symbol(sym: &str, alphabet: &[String]) -> Vec<String> {
    let mut set: BTreeSet<String> = alphabet.iter().cloned().collect();
    set.insert(sym.to_string());
    set.into_iter().collect()
}

/// Single-character symbols of a period, sorted.
pub fn period_alphabet(r: &str) -> Vec<String> {
    let set: BTreeSet<char> = r.chars().collect();
    set.into_iter().map(String::from).collect()
}

/// The graph whose capacity is the synthesis capacity of `spec`: `G(r)`,
/// or the recurrent part of `G(r) × G_c` reachable from `(v_M, v_s)`.
/// `None` when the product has no recurrent part.
pub fn synthesis_graph(spec: &SynthesisSpec) -> Result<Option<ChannelGraph>> {
    let g = periodic_subsequence_graph(&spec.period)?;
    let Some(c) = &spec.constraint else {
        return Ok(Some(g));
    };
    let product = label_product(&g, c);
    let start = product
        .start()
        .ok_or_else(|| Error::Synthesis("constraint graph needs a start vertex".into()))?;
    match product.trim_to_recurrent(start) {
        Ok(t) => Ok(Some(t.graph)),
        Err(Error::Graph(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisCapacity {
    pub capacity: f64,
    /// Root of `ρ(x) = 1`; `None` for an empty recurrent part.
    pub x0: Option<f64>,
    pub warning: Option<String>,
}

pub fn synthesis_capacity(spec: &SynthesisSpec) -> Result<SynthesisCapacity> {
    match synthesis_graph(spec)? {
        None => Ok(SynthesisCapacity {
            capacity: 0.0,
            x0: None,
            warning: Some("constrained product has no recurrent part".into()),
        }),
        Some(g) => {
            let vc = CapacityModel::new(&g)?.variable_length()?;
            Ok(SynthesisCapacity {
                capacity: vc.capacity,
                x0: Some(vc.x0),
                warning: None,
            })
        }
    }
}

pub fn synthesis_capacity_fixed(spec: &SynthesisSpec, alpha: f64) -> Result<FixedLengthCapacity> {
    match synthesis_graph(spec)? {
        None => Ok(FixedLengthCapacity {
            alpha,
            capacity: 0.0,
            regime: Regime::Void,
            x0: None,
            warning: Some("constrained product has no recurrent part".into()),
        }),
        Some(g) => CapacityModel::new(&g)?.fixed_length(alpha),
    }
}

/// Synthesis capacities of many specs, in input order.
pub fn synthesis_sweep(specs: &[SynthesisSpec], exec: Execution) -> Vec<Result<SynthesisCapacity>> {
    par::map(exec, specs, synthesis_capacity)
}

/// `−log₂ x_q` with `Σ_{i=1}^q x_q^i = 1`.
pub fn alternating_capacity(q: u32) -> f64 {
    let f = |x: f64| (1..=q).map(|i| x.powi(i as i32)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -(0.5 * (lo + hi)).log2()
}

/// `C_{r_2}(α) = α h((1 − α)/α)` for `2/3 ≤ α < 1`.
pub fn binary_alternating_fixed(alpha: f64) -> f64 {
    alpha * binary_entropy((1.0 - alpha) / alpha)
}

/// `C_{r_3}(α) = α h(γ/α) + γ h((1 − α − γ)/γ)` for `1/2 ≤ α < 1`.
pub fn ternary_alternating_fixed(alpha: f64) -> f64 {
    let gamma = -2.0 / 3.0 * alpha + (-8.0 * alpha * alpha + 12.0 * alpha - 3.0).sqrt() / 6.0 + 0.5;
    alpha * binary_entropy(gamma / alpha) + gamma * binary_entropy((1.0 - alpha - gamma) / gamma)
}
