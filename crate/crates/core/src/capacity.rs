//! Variable-length capacity, the capacity-cost function `C_G(α)` and its
//! thresholds.
//!
//! Write `f(x) = x ρ'(x) / ρ(x)`. For a cost-diverse graph `f` increases
//! strictly from the minimum mean cycle cost `T_min` (as `x → 0`) to the
//! maximum mean cycle cost `T_max` (as `x → ∞`). The thresholds are
//! `α_lo = 1 / f(1)` and `α_up = 1 / T_min`, and the critical point
//! `x₀(α)` solves `f(x₀) = 1/α`. Every root is located by bisection.
//!
//! Capacities are in bits.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::ChannelGraph;
use crate::par::{self, Execution};
use crate::spectral::{cost_matrix, perron, spectral_radius, CostPolynomialMatrix};
use crate::structure::{analyze_structure, StructureReport};

/// Exact minimum and maximum mean edge cost over all cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeanCycleBounds {
    pub min: Ratio<i64>,
    pub max: Ratio<i64>,
}

/// Karp's minimum mean cycle over a strongly connected graph; `None` for an
/// acyclic graph.
fn karp_min_mean(n: usize, edges: &[(usize, usize, i64)]) -> Option<Ratio<i64>> {
    if n == 0 || edges.is_empty() {
        return None;
    }
    // dist[k][v]: least weight of a walk with exactly k edges from vertex 0
    let mut dist = vec![vec![None::<i64>; n]; n + 1];
    dist[0][0] = Some(0);
    for k in 1..=n {
        for &(u, v, w) in edges {
            if let Some(du) = dist[k - 1][u] {
                let cand = du + w;
                if dist[k][v].is_none_or(|dv| cand < dv) {
                    dist[k][v] = Some(cand);
                }
            }
        }
    }
    let mut best: Option<Ratio<i64>> = None;
    for (v, dn) in dist[n].iter().enumerate() {
        let Some(dn) = *dn else { continue };
        let worst = (0..n)
            .filter_map(|k| dist[k][v].map(|dk| Ratio::new(dn - dk, (n - k) as i64)))
            .max();
        if let Some(m) = worst {
            if best.is_none_or(|b| m < b) {
                best = Some(m);
            }
        }
    }
    best
}

/// Minimum and maximum cycle mean of a strongly connected graph.
pub fn mean_cycle_bounds(g: &ChannelGraph) -> Result<MeanCycleBounds> {
    if !g.is_strongly_connected() {
        return Err(Error::Capacity(
            "mean cycle bounds need a strongly connected graph".into(),
        ));
    }
    let n = g.num_vertices();
    let pos: Vec<_> = g
        .edges()
        .iter()
        .map(|e| (e.init, e.term, e.cost as i64))
        .collect();
    let neg: Vec<_> = pos.iter().map(|&(u, v, w)| (u, v, -w)).collect();
    match (karp_min_mean(n, &pos), karp_min_mean(n, &neg)) {
        (Some(min), Some(neg_max)) => Ok(MeanCycleBounds { min, max: -neg_max }),
        _ => Err(Error::Capacity("graph has no cycles".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariableLengthCapacity {
    /// `C_G = −log₂ x₀`.
    pub capacity: f64,
    /// The root of `ρ(x) = 1`.
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `α ≤ α_lo`
    Linear,
    /// `α_lo < α < α_up`
    Concave,
    /// `α ≥ α_up`
    Void,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Concave => "concave",
            Regime::Void => "void",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedLengthCapacity {
    pub alpha: f64,
    pub capacity: f64,
    pub regime: Regime,
    /// Critical point, concave regime only.
    pub x0: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    pub capacity: f64,
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityCurve {
    pub alpha_lo: f64,
    /// `f64::INFINITY` when the graph has a zero-cost cycle.
    pub alpha_up: f64,
    pub alpha_star: f64,
    /// Variable-length capacity.
    pub capacity: f64,
    /// Increasing in `α`.
    pub samples: Vec<CurvePoint>,
}

/// Precomputed data shared by all capacity queries on one graph.
#[derive(Debug, Clone)]
pub struct CapacityModel {
    p: CostPolynomialMatrix,
    structure: StructureReport,
    bounds: MeanCycleBounds,
    rho1: f64,
    rho1_prime: f64,
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl CapacityModel {
    pub fn new(g: &ChannelGraph) -> Result<Self> {
        let structure = analyze_structure(g)?;
        let bounds = mean_cycle_bounds(g)?;
        let p = cost_matrix(g);
        let sp = perron(&p, 1.0)?;
        Ok(Self {
            p,
            structure,
            bounds,
            rho1: sp.rho,
            rho1_prime: sp.rho_prime,
        })
    }

    pub fn matrix(&self) -> &CostPolynomialMatrix {
        &self.p
    }

    pub fn structure(&self) -> &StructureReport {
        &self.structure
    }

    pub fn mean_cycle_bounds(&self) -> MeanCycleBounds {
        self.bounds
    }

    pub fn alpha_lo(&self) -> f64 {
        self.rho1 / self.rho1_prime
    }

    pub fn alpha_up(&self) -> f64 {
        if self.bounds.min.is_zero() {
            f64::INFINITY
        } else {
            1.0 / ratio_f64(self.bounds.min)
        }
    }

    /// `1 / T_max`, the infimum of admissible `α` for the critical equation.
    pub fn alpha_min(&self) -> f64 {
        if self.bounds.max.is_zero() {
            f64::INFINITY
        } else {
            1.0 / ratio_f64(self.bounds.max)
        }
    }

    fn log_slope(&self, s: f64) -> Result<f64> {
        Ok(perron(&self.p, s.exp())?.log_slope())
    }

    /// Root of `ρ(x) = 1`.
    pub fn variable_length(&self) -> Result<VariableLengthCapacity> {
        if self.structure.zero_cost_cycle {
            return Err(Error::Capacity(
                "zero-cost cycle: ρ(x) does not fall below 1 as x → 0, no bracket for ρ(x) = 1"
                    .into(),
            ));
        }
        let rho = |x: f64| spectral_radius(&self.p, x);
        let mut lo = 0.5;
        while rho(lo)? >= 1.0 {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::Capacity(
                    "bracket failure: ρ(x) ≥ 1 near x = 0".into(),
                ));
            }
        }
        let mut hi = 1.0 + self.p.max_degree() as f64;
        while rho(hi)? <= 1.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::Capacity(
                    "bracket failure: ρ(x) ≤ 1 for large x".into(),
                ));
            }
        }
        let x0 = bisect(lo, hi, |x| Ok(rho(x)? < 1.0))?;
        Ok(VariableLengthCapacity {
            capacity: -x0.log2(),
            x0,
        })
    }

    /// Solves `x ρ'(x) / ρ(x) = 1/α`.
    pub fn critical_x(&self, alpha: f64) -> Result<f64> {
        self.require_diverse()?;
        let (amin, aup) = (self.alpha_min(), self.alpha_up());
        if !(alpha > amin && alpha < aup) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} outside the admissible interval ({amin}, {aup})"
            )));
        }
        let target = 1.0 / alpha;
        let limit = 650.0 / self.p.max_degree().max(1) as f64;
        let too_close = || {
            Error::Domain(format!(
                "alpha = {alpha} too close to the boundary of ({amin}, {aup})"
            ))
        };
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut step = 1.0;
        while self.log_slope(lo)? >= target {
            lo -= step;
            step *= 2.0;
            if lo < -limit {
                return Err(too_close());
            }
        }
        step = 1.0;
        while self.log_slope(hi)? <= target {
            hi += step;
            step *= 2.0;
            if hi > limit {
                return Err(too_close());
            }
        }
        let s = bisect(lo, hi, |s| Ok(self.log_slope(s)? < target))?;
        Ok(s.exp())
    }

    fn require_diverse(&self) -> Result<()> {
        if self.structure.cost_diverse {
            Ok(())
        } else {
            Err(Error::Degenerate(
                "cost-uniform graph has no capacity-cost curve".into(),
            ))
        }
    }

    /// `C_G(α)` in all three regimes.
    pub fn fixed_length(&self, alpha: f64) -> Result<FixedLengthCapacity> {
        self.require_diverse()?;
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        let (alo, aup) = (self.alpha_lo(), self.alpha_up());
        let mut out = FixedLengthCapacity {
            alpha,
            capacity: 0.0,
            regime: Regime::Void,
            x0: None,
            warning: None,
        };
        if alpha <= alo {
            out.regime = Regime::Linear;
            out.capacity = alpha * self.rho1.log2();
        } else if alpha < aup {
            let x0 = self.critical_x(alpha)?;
            let rho = spectral_radius(&self.p, x0)?;
            out.regime = Regime::Concave;
            out.capacity = -x0.log2() + alpha * rho.log2();
            out.x0 = Some(x0);
        } else if alpha == aup {
            out.warning = Some("alpha equals alpha_up; boundary value set to 0".into());
        }
        Ok(out)
    }

    /// `α* = 1 / (x₀ ρ'(x₀))` with `ρ(x₀) = 1`.
    pub fn alpha_star(&self) -> Result<f64> {
        let vc = self.variable_length()?;
        let sp = perron(&self.p, vc.x0)?;
        Ok(1.0 / (vc.x0 * sp.rho_prime))
    }

    /// `n` uniform samples on `(0, α_up)` plus `α_lo` and `α*`.
    ///
    /// With a zero-cost cycle (`α_up = ∞`) the grid spans `(0, 2·max(α_lo, α*))`.
    pub fn curve(&self, n: usize, exec: Execution) -> Result<CapacityCurve> {
        self.require_diverse()?;
        let vc = self.variable_length()?;
        let alpha_star = self.alpha_star()?;
        let (alo, aup) = (self.alpha_lo(), self.alpha_up());
        let top = if aup.is_finite() {
            aup
        } else {
            2.0 * alo.max(alpha_star)
        };
        let mut alphas: Vec<f64> = (1..=n).map(|i| top * i as f64 / (n + 1) as f64).collect();
        alphas.push(alo);
        alphas.push(alpha_star);
        alphas.sort_by(|a, b| a.partial_cmp(b).unwrap());
        alphas.dedup();
        let samples = par::map(exec, &alphas, |&a| {
            self.fixed_length(a).map(|f| CurvePoint {
                alpha: a,
                capacity: f.capacity,
                x0: f.x0,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let at_star = samples
            .iter()
            .find(|p| p.alpha == alpha_star)
            .map(|p| p.capacity)
            .unwrap_or(f64::NAN);
        if (at_star - vc.capacity).abs() > 1e-9 {
            return Err(Error::Capacity(format!(
                "C(alpha*) = {at_star} differs from the variable-length capacity {}",
                vc.capacity
            )));
        }
        Ok(CapacityCurve {
            alpha_lo: alo,
            alpha_up: aup,
            alpha_star,
            capacity: vc.capacity,
            samples,
        })
    }

    /// `ρ(x) / (x ρ'(x))` at each `x`, approaching `α_up` as `x → 0`.
    pub fn alpha_up_numeric(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter()
            .map(|&x| perron(&self.p, x).map(|sp| 1.0 / sp.log_slope()))
            .collect()
    }
}

/// Bisection on `[lo, hi]` where `below(lo)` holds and `below(hi)` does
/// not; runs until the bracket stops shrinking.
fn bisect(mut lo: f64, mut hi: f64, below: impl Fn(f64) -> Result<bool>) -> Result<f64> {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn variable_length_capacity(g: &ChannelGraph) -> Result<VariableLengthCapacity> {
    CapacityModel::new(g)?.variable_length()
}

/// `ρ(1) / ρ'(1)`.
pub fn alpha_lo(g: &ChannelGraph) -> Result<f64> {
    Ok(CapacityModel::new(g)?.alpha_lo())
}

/// `1 / T_min`; `f64::INFINITY` with a zero-cost cycle.
pub fn alpha_up(g: &ChannelGraph) -> Result<f64> {
    Ok(CapacityModel::new(g)?.alpha_up())
}

pub fn critical_x(g: &ChannelGraph, alpha: f64) -> Result<f64> {
    CapacityModel::new(g)?.critical_x(alpha)
}

pub fn fixed_length_capacity(g: &ChannelGraph, alpha: f64) -> Result<FixedLengthCapacity> {
    CapacityModel::new(g)?.fixed_length(alpha)
}

pub fn capacity_curve(g: &ChannelGraph, n: usize, exec: Execution) -> Result<CapacityCurve> {
    CapacityModel::new(g)?.curve(n, exec)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}
