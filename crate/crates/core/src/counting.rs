//! Exact follower counts and their closed forms.
//!
//! `N_v(t, n)` counts words of length `n` and cost at most `t` generated
//! from `v`; `N_v(t)` sums over all lengths. Both are computed exactly by
//! dynamic programming. The generating function of `N_v(t)` is
//! `Q_v(x) / H(x)` with `H = (1 − x)·det(I − P(x))`, which yields the closed
//! form `N_v(t) = Σ_i Π_i(t) x_i^{−t}` over the roots `x_i` of `H`.
//! The fixed-length counts have leading-order asymptotics governed by the
//! Perron data of `P` at the critical point.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::capacity::{CapacityModel, Regime};
use crate::error::{Error, Result};
use crate::graph::ChannelGraph;
use crate::poly::{roots_square_free, square_free_decomposition, taylor_shift, IntPoly, RatPoly};
use crate::spectral::{cost_matrix, perron};

/// Largest dimension accepted by [`denominator_and_numerator`].
pub const MAX_SYMBOLIC_DIM: usize = 12;

/// Smallest admissible distance between distinct roots of `H`.
pub const ROOT_GAP: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub start: usize,
    pub t_max: usize,
    pub n_max: usize,
    /// `values[t][n] = N_start(t, n)`.
    pub values: Vec<Vec<BigUint>>,
}

impl CountTable {
    pub fn get(&self, t: usize, n: usize) -> &BigUint {
        &self.values[t][n]
    }

    /// `Σ_n N(t, n)` over the stored lengths.
    pub fn row_total(&self, t: usize) -> BigUint {
        self.values[t].iter().sum()
    }
}

fn require_deterministic(g: &ChannelGraph) -> Result<()> {
    if g.is_deterministic() {
        Ok(())
    } else {
        Err(Error::Counting(
            "graph is not deterministic; path counts would overcount words".into(),
        ))
    }
}

fn check_vertex(g: &ChannelGraph, v: usize) -> Result<()> {
    if v < g.num_vertices() {
        Ok(())
    } else {
        Err(Error::Counting(format!("start vertex {v} out of range")))
    }
}

/// One step of the length recursion: from `N_·(·, n−1)` to `N_·(·, n)`.
fn next_layer(g: &ChannelGraph, prev: &[Vec<BigUint>], t_max: usize) -> Vec<Vec<BigUint>> {
    let mut out = vec![vec![BigUint::zero(); t_max + 1]; g.num_vertices()];
    for e in g.edges() {
        let w = e.cost as usize;
        if w > t_max {
            continue;
        }
        let (dst, src) = (&mut out[e.init], &prev[e.term]);
        for t in w..=t_max {
            dst[t] += &src[t - w];
        }
    }
    out
}

/// `N_v(t, n)` for all `t ≤ t_max`, `n ≤ n_max`.
pub fn count_table(g: &ChannelGraph, v: usize, t_max: usize, n_max: usize) -> Result<CountTable> {
    require_deterministic(g)?;
    check_vertex(g, v)?;
    let mut values = vec![Vec::with_capacity(n_max + 1); t_max + 1];
    let mut layer = vec![vec![BigUint::one(); t_max + 1]; g.num_vertices()];
    for n in 0..=n_max {
        if n > 0 {
            layer = next_layer(g, &layer, t_max);
        }
        for (t, row) in values.iter_mut().enumerate() {
            row.push(layer[v][t].clone());
        }
    }
    Ok(CountTable {
        start: v,
        t_max,
        n_max,
        values,
    })
}

/// The single value `N_v(t, n)`, keeping only two layers in memory.
pub fn count_fixed(g: &ChannelGraph, v: usize, t: usize, n: usize) -> Result<BigUint> {
    require_deterministic(g)?;
    check_vertex(g, v)?;
    let mut layer = vec![vec![BigUint::one(); t + 1]; g.num_vertices()];
    for _ in 0..n {
        layer = next_layer(g, &layer, t);
    }
    Ok(layer[v][t].clone())
}

/// `N_v(t)` for `t = 0..=t_max`.
pub fn count_totals(g: &ChannelGraph, v: usize, t_max: usize) -> Result<Vec<BigUint>> {
    require_deterministic(g)?;
    check_vertex(g, v)?;
    let order = zero_cost_order(g)?;
    let n = g.num_vertices();
    let mut table: Vec<Vec<BigUint>> = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let mut row = vec![BigUint::zero(); n];
        for &u in &order {
            let mut acc = BigUint::one();
            for e in g.out_edges(u) {
                let w = e.cost as usize;
                if w == 0 {
                    acc += &row[e.term];
                } else if w <= t {
                    acc += &table[t - w][e.term];
                }
            }
            row[u] = acc;
        }
        table.push(row);
    }
    Ok(table.into_iter().map(|mut r| r.swap_remove(v)).collect())
}

/// Vertices ordered so that every zero-cost edge points to an earlier
/// vertex.
fn zero_cost_order(g: &ChannelGraph) -> Result<Vec<usize>> {
    let n = g.num_vertices();
    let mut outdeg = vec![0usize; n];
    let mut preds = vec![Vec::new(); n];
    for e in g.edges().iter().filter(|e| e.cost == 0) {
        outdeg[e.init] += 1;
        preds[e.term].push(e.init);
    }
    let mut ready: Vec<usize> = (0..n).filter(|&u| outdeg[u] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop() {
        order.push(u);
        for &p in &preds[u] {
            outdeg[p] -= 1;
            if outdeg[p] == 0 {
                ready.push(p);
            }
        }
    }
    if order.len() < n {
        return Err(Error::Counting(
            "zero-cost cycle: follower sets are infinite".into(),
        ));
    }
    Ok(order)
}

/// Determinant over ℤ[x] by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(mut m: Vec<Vec<IntPoly>>) -> Result<IntPoly> {
    let n = m.len();
    if n == 0 {
        return Ok(IntPoly::one());
    }
    let mut sign = false;
    let mut prev = IntPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = !sign;
                }
                None => return Ok(IntPoly::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .div_exact(&prev)
                    .ok_or_else(|| Error::Counting("inexact Bareiss step".into()))?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign { -&det } else { det })
}

/// `I − P(x)` over ℤ[x].
fn identity_minus_p(g: &ChannelGraph) -> Vec<Vec<IntPoly>> {
    let p = cost_matrix(g);
    let n = p.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let e = -&p.entry_poly(i, j);
                    if i == j {
                        &IntPoly::one() + &e
                    } else {
                        e
                    }
                })
                .collect()
        })
        .collect()
}

/// `H(x) = (1 − x)·det(I − P(x))` and `Q_v(x) = [adj(I − P(x))·1]_v`.
pub fn denominator_and_numerator(g: &ChannelGraph, v: usize) -> Result<(IntPoly, IntPoly)> {
    check_vertex(g, v)?;
    let n = g.num_vertices();
    if n > MAX_SYMBOLIC_DIM {
        return Err(Error::Counting(format!(
            "{n} vertices exceed the symbolic limit of {MAX_SYMBOLIC_DIM}; use the DP counts instead"
        )));
    }
    let a = identity_minus_p(g);
    let det = bareiss_determinant(a.clone())?;
    let h = &IntPoly::from_i64(&[1, -1]) * &det;
    // Cramer: replacing column v by the all-ones vector gives [adj(A)·1]_v.
    let mut cramer = a;
    for row in cramer.iter_mut() {
        row[v] = IntPoly::one();
    }
    let q = bareiss_determinant(cramer)?;
    Ok((h, q))
}

/// One root of `H` with its polynomial coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub root: Complex64,
    /// Multiplicity as a root of `H`.
    pub multiplicity: usize,
    /// Pole order of `Q/H` at the root (0 when fully cancelled).
    pub pole_order: usize,
    /// `Π(t)` in powers of `t`, ascending; empty when the root cancels.
    pub pi: Vec<Complex64>,
}

impl ExpansionTerm {
    pub fn pi_at(&self, t: f64) -> Complex64 {
        self.pi
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, &c| acc * t + c)
    }

    /// `Π(t)·x_i^{−t}`
    pub fn contribution(&self, t: u64) -> Complex64 {
        if self.pi.is_empty() {
            return Complex64::zero();
        }
        self.pi_at(t as f64) * self.root.inv().powi(t as i32)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactExpansion {
    pub denominator: IntPoly,
    pub numerator: IntPoly,
    /// `Q/H` in lowest terms.
    pub reduced_denominator: IntPoly,
    pub reduced_numerator: IntPoly,
    /// Polynomial part of `Q/H`; adds `s_t` to `N(t)` for `t < len`.
    pub polynomial_part: Vec<f64>,
    pub terms: Vec<ExpansionTerm>,
}

impl ExactExpansion {
    /// `Σ_i Π_i(t)·x_i^{−t}` (plus the polynomial part).
    pub fn eval(&self, t: u64) -> Complex64 {
        let poly = self.polynomial_part.get(t as usize).copied().unwrap_or(0.0);
        self.terms
            .iter()
            .map(|r| r.contribution(t))
            .sum::<Complex64>()
            + poly
    }

    /// Nearest integer to the real part of [`eval`](Self::eval).
    pub fn eval_rounded(&self, t: u64) -> Result<BigInt> {
        let z = self.eval(t);
        let r = z.re.round();
        BigInt::from_f64(r).ok_or_else(|| Error::Expansion(format!("non-finite value at t = {t}")))
    }
}

trait FromF64: Sized {
    fn from_f64(x: f64) -> Option<Self>;
}

impl FromF64 for BigInt {
    fn from_f64(x: f64) -> Option<Self> {
        num_traits::FromPrimitive::from_f64(x)
    }
}

/// Square-free pieces of `H` refined against the cancelled factor `g`:
/// `(piece, multiplicity in H, multiplicity in H/g)`.
fn refined_pieces(h: &IntPoly, g: &IntPoly) -> Result<Vec<(IntPoly, usize, usize)>> {
    let gparts = square_free_decomposition(g)?;
    let mut out = Vec::new();
    for (f, m) in square_free_decomposition(h)? {
        let mut rest = f;
        for (gp, j) in &gparts {
            let common = rest.gcd(gp);
            if common.degree().unwrap_or(0) > 0 {
                out.push((common.clone(), m, m - j));
                rest = rest
                    .div_exact_q(&common)?
                    .clear_denominators()
                    .0
                    .primitive();
            }
        }
        if rest.degree().unwrap_or(0) > 0 {
            out.push((rest, m, m));
        }
    }
    Ok(out)
}

/// Series quotient `a/b` truncated to `len` terms (`b[0] ≠ 0`).
fn series_divide(a: &[Complex64], b: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut q = vec![Complex64::zero(); len];
    for k in 0..len {
        let mut s = a.get(k).copied().unwrap_or_default();
        for i in 1..=k.min(b.len().saturating_sub(1)) {
            s -= b[i] * q[k - i];
        }
        q[k] = s / b[0];
    }
    q
}

/// Power-basis coefficients of `binom(t + k − 1, k − 1)`.
fn binomial_poly(k: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for i in 1..k {
        // times (t + i) / i
        let mut next = vec![0.0; p.len() + 1];
        for (d, &c) in p.iter().enumerate() {
            next[d] += c;
            next[d + 1] += c / i as f64;
        }
        p = next;
    }
    p
}

/// Closed form `N_v(t) = Σ_i Π_i(t) x_i^{−t}`.
pub fn exact_expansion(g: &ChannelGraph, v: usize) -> Result<ExactExpansion> {
    let (h, q) = denominator_and_numerator(g, v)?;
    if h.coeffs().first().is_none_or(Zero::is_zero) {
        return Err(Error::Expansion(
            "H(0) = 0: the counts are not a power series (zero-cost cycle?)".into(),
        ));
    }
    let common = q.gcd(&h);
    let hr = h.div_exact_q(&common)?;
    let qr = q.div_exact_q(&common)?;
    let (hr_int, s_h) = hr.clear_denominators();
    let qr_scaled = scale_rat(&qr, &s_h);
    let (qr_int, s_q) = qr_scaled.clear_denominators();
    // Q/H = (qr_int / s_q) / hr_int
    let inv_sq = 1.0 / s_q.to_f64().unwrap_or(f64::NAN);

    let (poly_part, rem) = RatPoly::from_int(&qr_int).div_rem(&RatPoly::from_int(&hr_int));
    let polynomial_part: Vec<f64> = poly_part.to_f64().into_iter().map(|c| c * inv_sq).collect();
    let rem_f: Vec<f64> = rem.to_f64().into_iter().map(|c| c * inv_sq).collect();
    let hr_f = hr_int.to_f64();

    let mut roots: Vec<(Complex64, usize, usize)> = Vec::new();
    for (piece, m, order) in refined_pieces(&h, &common)? {
        for r in roots_square_free(&piece)? {
            roots.push((r, m, order));
        }
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let gap = (roots[i].0 - roots[j].0).norm();
            if gap < ROOT_GAP {
                return Err(Error::Expansion(format!(
                    "distinct roots {} and {} are only {gap:.3e} apart",
                    roots[i].0, roots[j].0
                )));
            }
        }
    }

    let mut terms = Vec::with_capacity(roots.len());
    for (r, m, order) in roots {
        let pi = if order == 0 {
            Vec::new()
        } else {
            let eta = taylor_shift(&hr_f, r);
            let hloc: Vec<Complex64> = eta.iter().skip(order).copied().collect();
            let qloc = taylor_shift(&rem_f, r);
            let a = series_divide(&qloc, &hloc, order);
            let mut pi = vec![Complex64::zero(); order];
            let neg_r_inv = (-r).inv();
            for k in 1..=order {
                let ck = a[order - k] * neg_r_inv.powi(k as i32);
                for (d, b) in binomial_poly(k).into_iter().enumerate() {
                    pi[d] += ck * b;
                }
            }
            pi
        };
        terms.push(ExpansionTerm {
            root: r,
            multiplicity: m,
            pole_order: order,
            pi,
        });
    }
    terms.sort_by(|a, b| {
        (a.root.norm(), a.root.arg())
            .partial_cmp(&(b.root.norm(), b.root.arg()))
            .unwrap()
    });
    Ok(ExactExpansion {
        denominator: h,
        numerator: q,
        reduced_denominator: hr_int,
        reduced_numerator: qr_int,
        polynomial_part,
        terms,
    })
}

fn scale_rat(p: &RatPoly, s: &BigInt) -> RatPoly {
    let f = BigRational::from_integer(s.clone());
    let coeffs: Vec<BigRational> = p.coeffs().iter().map(|c| c * &f).collect();
    RatPoly::from_coeffs(coeffs)
}

/// One `(j, k)` summand of the asymptotic formula, relative to
/// `exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticTerm {
    /// Index over the `d` peripheral eigenvalues.
    pub j: u64,
    /// Index over the `c` rotations (always 0 in the linear regime).
    pub k: u64,
    pub contribution: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticEstimate {
    pub t: u64,
    pub n: u64,
    pub alpha: f64,
    pub regime: Regime,
    /// Leading-order estimate of `N_v(t, n)`; may be infinite for huge `t`.
    pub estimate: f64,
    /// Natural log of the estimate.
    pub ln_estimate: f64,
    /// Common magnitude factor of all terms (natural log).
    pub ln_scale: f64,
    pub terms: Vec<AsymptoticTerm>,
    /// `|Im Σ| / |Re Σ|` of the summed terms.
    pub imaginary_residue: f64,
    /// Critical point (concave regime).
    pub x0: Option<f64>,
}

/// Leading-order asymptotics of `N_v(t, n)` with `α = n / t`.
pub fn asymptotic_fixed_length(
    g: &ChannelGraph,
    v: usize,
    n: u64,
    t: u64,
) -> Result<AsymptoticEstimate> {
    require_deterministic(g)?;
    check_vertex(g, v)?;
    if t == 0 {
        return Err(Error::Domain("t must be positive".into()));
    }
    let model = CapacityModel::new(g)?;
    let st = model.structure().clone();
    if !st.cost_diverse {
        return Err(Error::Degenerate(
            "cost-uniform graph has no fixed-length asymptotics".into(),
        ));
    }
    let alpha = n as f64 / t as f64;
    let (alo, aup) = (model.alpha_lo(), model.alpha_up());
    let d = st.period;
    let omega = |num: f64, den: f64| Complex64::from_polar(1.0, 2.0 * PI * num / den);
    let mut out = AsymptoticEstimate {
        t,
        n,
        alpha,
        regime: Regime::Void,
        estimate: 0.0,
        ln_estimate: f64::NEG_INFINITY,
        ln_scale: f64::NEG_INFINITY,
        terms: Vec::new(),
        imaginary_residue: 0.0,
        x0: None,
    };
    if n == 0 || alpha == alo {
        return Err(Error::Domain(format!(
            "alpha = {alpha} lies on a regime boundary (0 or alpha_lo = {alo})"
        )));
    }
    if alpha < alo {
        let sp = perron(model.matrix(), 1.0)?;
        out.regime = Regime::Linear;
        out.ln_scale = n as f64 * sp.rho.ln();
        let ones = vec![Complex64::new(1.0, 0.0); sp.u.len()];
        for j in 0..d {
            let phase = omega(((j * n) % d) as f64, d as f64);
            let pair = cyclic_pairing(&sp.u, &sp.v, &st.cyclic_class, v, j, d, &ones);
            out.terms.push(AsymptoticTerm {
                j,
                k: 0,
                contribution: phase * pair,
            });
        }
    } else if alpha < aup {
        let x0 = model.critical_x(alpha)?;
        let sp = perron(model.matrix(), x0)?;
        let c = st.cost_period;
        out.regime = Regime::Concave;
        out.x0 = Some(x0);
        out.ln_scale = n as f64 * sp.rho.ln()
            - t as f64 * x0.ln()
            - 0.5 * (t as f64).ln()
            - 0.5 * (2.0 * PI * alpha * sp.curvature).ln();
        let b = st.b_f64();
        let cf = c as f64;
        for k in 0..c {
            let dk: Vec<Complex64> = (0..sp.u.len())
                .map(|a| omega(k as f64 * st.potential_f64(a), cf))
                .collect();
            let rot = omega(k as f64, cf);
            for j in 0..d {
                // (e^{2πibk/c} λ_j)^n (x₀ e^{2πik/c})^{−t} without the magnitudes
                let theta = b * (k * n) as f64 / cf + ((j * n) % d) as f64 / d as f64
                    - ((k * t) % c) as f64 / cf;
                let phase = Complex64::from_polar(1.0, 2.0 * PI * theta);
                let pair = cyclic_pairing(&sp.u, &sp.v, &st.cyclic_class, v, j, d, &dk);
                let denom = Complex64::new(1.0, 0.0) - rot * x0;
                out.terms.push(AsymptoticTerm {
                    j,
                    k,
                    contribution: phase * pair / denom,
                });
            }
        }
    } else {
        return Ok(out);
    }
    let sum: Complex64 = out.terms.iter().map(|t| t.contribution).sum();
    out.imaginary_residue = if sum.re == 0.0 {
        sum.im.abs()
    } else {
        (sum.im / sum.re).abs()
    };
    out.ln_estimate = out.ln_scale + sum.re.ln();
    out.estimate = out.ln_scale.exp() * sum.re;
    Ok(out)
}

/// `[u_j]_v (v_j · D)` with `D_v` divided out, where `u_j, v_j` are the
/// Perron vectors twisted by `e^{±2πij·class/d}`.
fn cyclic_pairing(
    u: &[f64],
    v: &[f64],
    classes: &[u64],
    vertex: usize,
    j: u64,
    d: u64,
    dk: &[Complex64],
) -> Complex64 {
    let omega = |num: f64| Complex64::from_polar(1.0, 2.0 * PI * num / d as f64);
    let s: Complex64 = v
        .iter()
        .zip(dk)
        .zip(classes)
        .map(|((&va, &da), &cls)| omega(-((j * cls) as f64)) * va * da)
        .sum();
    omega((j * classes[vertex]) as f64) * u[vertex] / dk[vertex] * s
}

/// Natural log of a positive big integer.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}
