//! The cost-enumerator matrix `P(x)` and its Perron data.
//!
//! Entry `(i, j)` of `P(x)` sums `x^cost` over the edges `i -> j`. For
//! `x > 0` and an irreducible matrix the spectral radius `ρ(x)` is a simple
//! positive eigenvalue with strictly positive left and right eigenvectors.
//!
//! The dominant eigenpair is found by power iteration on the shifted matrix
//! `P(x) + εI` (which breaks the modulus ties between `ρ` and the rotated
//! eigenvalues of periodic graphs), then polished by two steps of inverse
//! iteration and a two-sided Rayleigh quotient. `ρ'` uses the eigenvalue
//! derivative identity `ρ' = v P'(x) u` with `v·u = 1`; the curvature
//! `J = d²/ds² log ρ(e^s)` uses the second-order perturbation formula with a
//! bordered linear solve.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::graph::ChannelGraph;
use crate::poly::IntPoly;

/// `P_G(x)` as a dense matrix of polynomials with nonnegative integer
/// coefficients (coefficient of `x^k` = number of edges of cost `k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostPolynomialMatrix {
    dim: usize,
    entries: Vec<Vec<u64>>,
}

impl CostPolynomialMatrix {
    pub fn from_graph(g: &ChannelGraph) -> Self {
        let dim = g.num_vertices();
        let mut entries = vec![Vec::new(); dim * dim];
        for e in g.edges() {
            let entry: &mut Vec<u64> = &mut entries[e.init * dim + e.term];
            let k = e.cost as usize;
            if entry.len() <= k {
                entry.resize(k + 1, 0);
            }
            entry[k] += 1;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficients of entry `(i, j)`, ascending; empty for a zero entry.
    pub fn entry(&self, i: usize, j: usize) -> &[u64] {
        &self.entries[i * self.dim + j]
    }

    pub fn entry_poly(&self, i: usize, j: usize) -> IntPoly {
        IntPoly::new(self.entry(i, j).iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn max_degree(&self) -> usize {
        self.entries
            .iter()
            .map(|e| e.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    fn eval_with(&self, f: impl Fn(&[u64]) -> f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| f(self.entry(i, j)))
    }

    /// `P(x)`
    pub fn eval(&self, x: f64) -> DMatrix<f64> {
        self.eval_with(|c| eval_real(c, x, 0))
    }

    /// `P'(x)`
    pub fn eval_derivative(&self, x: f64) -> DMatrix<f64> {
        self.eval_with(|c| eval_real(c, x, 1))
    }

    /// `P''(x)`
    pub fn eval_second_derivative(&self, x: f64) -> DMatrix<f64> {
        self.eval_with(|c| eval_real(c, x, 2))
    }

    pub fn eval_complex(&self, z: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.entry(i, j)
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(k, &c)| z.powu(k as u32) * c as f64)
                .sum()
        })
    }
}

/// `order`-th derivative of `Σ c_k x^k` at `x`.
fn eval_real(coeffs: &[u64], x: f64, order: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(order)
        .filter(|(_, &c)| c != 0)
        .map(|(k, &c)| {
            let falling: f64 = (0..order).map(|i| (k - i) as f64).product();
            c as f64 * falling * x.powi((k - order) as i32)
        })
        .sum()
}

/// Builds `P_G(x)` for a graph.
pub fn cost_matrix(g: &ChannelGraph) -> CostPolynomialMatrix {
    CostPolynomialMatrix::from_graph(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronOptions {
    /// Relative residual target for the eigenpair.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Spectral shift as a fraction of the running estimate of `ρ`.
    pub shift: f64,
}

impl Default for PerronOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 1_000_000,
            shift: 1.0,
        }
    }
}

/// Perron data of `P(x)` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub x: f64,
    pub rho: f64,
    pub rho_prime: f64,
    /// Right eigenvector, normalized to unit sum.
    pub u: Vec<f64>,
    /// Left eigenvector, normalized so that `v·u = 1`.
    pub v: Vec<f64>,
    /// `d²/ds² log ρ(e^s)` at `s = log x`.
    pub curvature: f64,
}

impl SpectralPoint {
    /// `x ρ'(x) / ρ(x)`, the mean cost per edge under the tilted measure.
    pub fn log_slope(&self) -> f64 {
        self.x * self.rho_prime / self.rho
    }
}

/// Dominant eigenpair `(ρ, u, v)` of a nonnegative irreducible matrix.
/// `u` sums to one, `v·u = 1`.
pub fn perron_eigenpair(
    m: &DMatrix<f64>,
    opts: &PerronOptions,
) -> Result<(f64, DVector<f64>, DVector<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::Eigen("empty matrix".into()));
    }
    if m.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::Eigen("matrix must be finite and nonnegative".into()));
    }
    let u = dominant_vector(m, opts)?;
    let mt = m.transpose();
    let v = dominant_vector(&mt, opts)?;
    let vu = v.dot(&u);
    if vu <= 0.0 || !vu.is_finite() {
        return Err(Error::Eigen(
            "left and right Perron vectors are orthogonal (reducible matrix?)".into(),
        ));
    }
    let rho = v.dot(&(m * &u)) / vu;
    let v = v / vu;
    Ok((rho, u, v))
}

fn normalize_sum(w: &mut DVector<f64>) -> f64 {
    let s: f64 = w.iter().sum();
    if s > 0.0 && s.is_finite() {
        *w /= s;
    }
    s
}

fn residual(m: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    let mu = m * u;
    let rho = mu.sum() / u.sum();
    let scale = rho.abs() * u.amax();
    if scale == 0.0 {
        return f64::INFINITY;
    }
    (mu - u * rho).amax() / scale
}

fn dominant_vector(m: &DMatrix<f64>, opts: &PerronOptions) -> Result<DVector<f64>> {
    let n = m.nrows();
    if m.iter().all(|&a| a == 0.0) {
        return Err(Error::Eigen("zero matrix has no Perron vector".into()));
    }
    let mut u = DVector::from_element(n, 1.0 / n as f64);
    let coarse = 1e-10;
    let mut converged = false;
    for it in 0..opts.max_iterations {
        let mu = m * &u;
        let eps = opts.shift * mu.sum();
        let mut w = mu + &u * eps;
        if normalize_sum(&mut w) <= 0.0 {
            return Err(Error::Eigen("power iteration collapsed to zero".into()));
        }
        let change = (&w - &u).amax() / w.amax();
        u = w;
        // Every 16 steps try to finish with inverse iteration.
        if change < coarse || it % 16 == 15 {
            if let Some(p) = polish(m, &u) {
                if residual(m, &p) <= opts.tolerance.max(64.0 * f64::EPSILON) {
                    u = p;
                    converged = true;
                    break;
                }
            }
            if change < opts.tolerance {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Eigen(format!(
            "power iteration did not converge in {} iterations",
            opts.max_iterations
        )));
    }
    if u.iter().any(|&a| a < 0.0) {
        // Components that should be positive but rounded through zero.
        if u.iter().any(|&a| a < -1e-12 * u.amax()) {
            return Err(Error::Eigen("Perron vector has negative components".into()));
        }
        u.iter_mut().for_each(|a| *a = a.max(0.0));
        normalize_sum(&mut u);
    }
    Ok(u)
}

/// Two steps of shifted inverse iteration at the current Rayleigh quotient.
fn polish(m: &DMatrix<f64>, u: &DVector<f64>) -> Option<DVector<f64>> {
    let n = m.nrows();
    let rho = (m * u).sum() / u.sum();
    let mu = rho * (1.0 + 1e-10) + f64::MIN_POSITIVE;
    let a = m - DMatrix::identity(n, n) * mu;
    let lu = a.lu();
    let mut w = u.clone();
    for _ in 0..2 {
        w = lu.solve(&w)?;
        if !w.iter().all(|a| a.is_finite()) {
            return None;
        }
        let s: f64 = w.iter().sum();
        if s == 0.0 {
            return None;
        }
        w /= s;
    }
    Some(w)
}

/// Spectral radius of `P(x)` only.
pub fn spectral_radius(p: &CostPolynomialMatrix, x: f64) -> Result<f64> {
    check_x(x)?;
    let (rho, _, _) = perron_eigenpair(&p.eval(x), &PerronOptions::default())?;
    Ok(rho)
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "x must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

/// Perron root, its derivative, both eigenvectors and the log-log curvature
/// of `P(x)` at `x > 0`.
pub fn perron(p: &CostPolynomialMatrix, x: f64) -> Result<SpectralPoint> {
    perron_with(p, x, &PerronOptions::default())
}

pub fn perron_with(
    p: &CostPolynomialMatrix,
    x: f64,
    opts: &PerronOptions,
) -> Result<SpectralPoint> {
    check_x(x)?;
    let m = p.eval(x);
    let (rho, u, v) = perron_eigenpair(&m, opts)?;
    let dp = p.eval_derivative(x);
    let rho_prime = v.dot(&(&dp * &u));
    let ddp = p.eval_second_derivative(x);
    let rho_second = second_derivative(&m, &dp, &ddp, rho, rho_prime, &u, &v)?;
    let slope = x * rho_prime / rho;
    let curvature = slope + x * x * rho_second / rho - slope * slope;
    Ok(SpectralPoint {
        x,
        rho,
        rho_prime,
        u: u.iter().copied().collect(),
        v: v.iter().copied().collect(),
        curvature,
    })
}

/// `ρ'' = v P'' u + 2 v P' w` where `(ρI - P) w = (P' - ρ'I) u`, `v·w = 0`.
fn second_derivative(
    m: &DMatrix<f64>,
    dp: &DMatrix<f64>,
    ddp: &DMatrix<f64>,
    rho: f64,
    rho_prime: f64,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> Result<f64> {
    let n = m.nrows();
    let mut bordered = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            bordered[(i, j)] = -m[(i, j)];
        }
        bordered[(i, i)] += rho;
        bordered[(i, n)] = u[i];
        bordered[(n, i)] = v[i];
    }
    let rhs_top = dp * u - u * rho_prime;
    let mut rhs = DVector::<f64>::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(&rhs_top);
    let sol = bordered
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Eigen("bordered system is singular (ρ not simple?)".into()))?;
    let w = sol.rows(0, n).into_owned();
    Ok(v.dot(&(ddp * u)) + 2.0 * v.dot(&(dp * w)))
}

/// Curvature `d²/ds² log ρ(e^s)` by central second differences with one
/// Richardson extrapolation step. `step` defaults to `1e-4·max(1, |log x|)`.
pub fn curvature_finite_difference(
    p: &CostPolynomialMatrix,
    x: f64,
    step: Option<f64>,
) -> Result<f64> {
    check_x(x)?;
    let s = x.ln();
    let h = step.unwrap_or(1e-4 * s.abs().max(1.0));
    let g = |t: f64| spectral_radius(p, t.exp()).map(f64::ln);
    let g0 = g(s)?;
    let d2 = |h: f64| -> Result<f64> { Ok((g(s + h)? - 2.0 * g0 + g(s - h)?) / (h * h)) };
    let coarse = d2(h)?;
    let fine = d2(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Spectral radius of a complex matrix, via its Schur form.
pub fn complex_spectral_radius(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)].norm());
    }
    let eig = m
        .clone()
        .eigenvalues()
        .ok_or_else(|| Error::Eigen("complex eigenvalue computation failed".into()))?;
    Ok(eig.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Outcome of the rotation-similarity and off-lattice checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationCheck {
    pub passed: bool,
    /// Largest relative entrywise deviation of the similarity identity.
    pub max_similarity_error: f64,
    /// Smallest relative drop `1 - |λ(x e^{iφ})| / ρ(x)` over off-lattice φ.
    pub min_off_lattice_drop: f64,
    pub violations: Vec<String>,
}

/// Verifies `P(x e^{2πik/c}) = e^{2πikb/c} D_k^{-1} P(x) D_k` for
/// `k = 0..c-1` with `[D_k]_jj = e^{2πik B_j / c}`, and that the spectral
/// radius of `P(x e^{iφ})` drops strictly below `ρ(x)` for φ strictly
/// between lattice points.
pub fn spectral_rotation_check(
    p: &CostPolynomialMatrix,
    x: f64,
    c: u64,
    b: Ratio<i64>,
    potentials: &[Ratio<i64>],
) -> Result<RotationCheck> {
    check_x(x)?;
    if c == 0 {
        return Err(Error::Domain(
            "rotation check needs a cost-period c >= 1".into(),
        ));
    }
    if potentials.len() != p.dim() {
        return Err(Error::Domain("one potential per vertex required".into()));
    }
    let n = p.dim();
    let cf = c as f64;
    let base = p.eval(x);
    let rho = spectral_radius(p, x)?;
    let bf = b.to_f64().unwrap_or(f64::NAN);
    let bv: Vec<f64> = potentials
        .iter()
        .map(|r| r.to_f64().unwrap_or(f64::NAN))
        .collect();

    let mut violations = Vec::new();
    let mut max_err = 0.0f64;
    let scale = base.amax().max(f64::MIN_POSITIVE);
    for k in 0..c {
        let kf = k as f64;
        let rotated = p.eval_complex(Complex64::from_polar(x, 2.0 * PI * kf / cf));
        let phase_b = Complex64::from_polar(1.0, 2.0 * PI * kf * bf / cf);
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = Complex64::from_polar(1.0, 2.0 * PI * kf * (bv[j] - bv[i]) / cf);
                let rhs = phase_b * d * base[(i, j)];
                err = err.max((rotated[(i, j)] - rhs).norm() / scale);
            }
        }
        max_err = max_err.max(err);
        if err > 1e-10 {
            violations.push(format!("similarity fails at k={k} (rel. error {err:.3e})"));
        }
    }

    let per_gap = 7;
    let mut min_drop = f64::INFINITY;
    for k in 0..c {
        for i in 1..=per_gap {
            let phi = 2.0 * PI * (k as f64 + i as f64 / (per_gap + 1) as f64) / cf;
            let r = complex_spectral_radius(&p.eval_complex(Complex64::from_polar(x, phi)))?;
            let drop = 1.0 - r / rho;
            min_drop = min_drop.min(drop);
            if drop <= 1e-9 {
                violations.push(format!(
                    "no spectral drop at phi={phi:.6} (|λ|={r:.12}, ρ={rho:.12})"
                ));
            }
        }
    }

    Ok(RotationCheck {
        passed: violations.is_empty(),
        max_similarity_error: max_err,
        min_off_lattice_drop: min_drop,
        violations,
    })
}

/// Largest relative deviation of `|λ_max(P(x e^{iφ}))|` from `ρ(x)` over
/// `samples` equally spaced φ. Vanishes for cost-uniform graphs.
pub fn circle_invariance_deviation(
    p: &CostPolynomialMatrix,
    x: f64,
    samples: usize,
) -> Result<f64> {
    let rho = spectral_radius(p, x)?;
    let mut worst = 0.0f64;
    for i in 0..samples {
        let phi = 2.0 * PI * i as f64 / samples as f64;
        let r = complex_spectral_radius(&p.eval_complex(Complex64::from_polar(x, phi)))?;
        worst = worst.max((r - rho).abs() / rho);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjugateCheck {
    pub passed: bool,
    /// `σ₂ / σ₁` of `adj(ρI - P(x))`.
    pub singular_value_ratio: f64,
    /// Scalar `c₀` with `adj = c₀ u vᵀ`.
    pub scale: f64,
    /// Relative deviation from `c₀ u vᵀ`.
    pub outer_product_error: f64,
    pub uniform_sign: bool,
}

/// Numerically forms `adj(ρI - P(x))` and checks that it is the rank-one
/// matrix `c₀ u vᵀ` with all entries of one sign.
pub fn adjugate_rank1_check(p: &CostPolynomialMatrix, x: f64) -> Result<AdjugateCheck> {
    let sp = perron(p, x)?;
    let n = p.dim();
    let a = DMatrix::identity(n, n) * sp.rho - p.eval(x);
    let adj = adjugate(&a);
    let sv = adj.clone().svd(false, false).singular_values;
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let ratio = if sorted.len() > 1 && sorted[0] > 0.0 {
        sorted[1] / sorted[0]
    } else {
        0.0
    };
    let outer = DMatrix::from_fn(n, n, |i, j| sp.u[i] * sp.v[j]);
    let scale = adj.dot(&outer) / outer.dot(&outer);
    let err = (&adj - &outer * scale).amax() / adj.amax().max(f64::MIN_POSITIVE);
    let uniform_sign = scale != 0.0 && adj.iter().all(|&a| a * scale > 0.0);
    Ok(AdjugateCheck {
        passed: ratio < 1e-8 && err < 1e-8 && uniform_sign,
        singular_value_ratio: ratio,
        scale,
        outer_product_error: err,
        uniform_sign,
    })
}

/// Classical adjugate via cofactor determinants.
pub fn adjugate(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    DMatrix::from_fn(n, n, |i, j| {
        // adj[i][j] = (-1)^{i+j} det(minor with row j and column i removed)
        let minor = a.clone().remove_row(j).remove_column(i);
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityCheck {
    pub passed: bool,
    /// Second divided differences of `log ρ(e^s)` at interior grid points.
    pub second_differences: Vec<f64>,
}

/// Samples `g(s) = log ρ(e^s)` on `grid` (increasing). For cost-diverse
/// graphs every second difference must be strictly positive; otherwise the
/// deviation from linear interpolation must stay below `1e-9`.
pub fn loglog_convexity_check(
    p: &CostPolynomialMatrix,
    cost_diverse: bool,
    grid: &[f64],
) -> Result<ConvexityCheck> {
    if grid.len() < 3
        || grid
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::Domain(
            "grid must be increasing with at least 3 points".into(),
        ));
    }
    let g = grid
        .iter()
        .map(|&s| spectral_radius(p, s.exp()).map(f64::ln))
        .collect::<Result<Vec<_>>>()?;
    let mut diffs = Vec::with_capacity(grid.len() - 2);
    let mut passed = true;
    for i in 1..grid.len() - 1 {
        let (s0, s1, s2) = (grid[i - 1], grid[i], grid[i + 1]);
        let left = (g[i] - g[i - 1]) / (s1 - s0);
        let right = (g[i + 1] - g[i]) / (s2 - s1);
        let dd = 2.0 * (right - left) / (s2 - s0);
        diffs.push(dd);
        if cost_diverse {
            passed &= dd > 0.0;
        } else {
            let w = (s1 - s0) / (s2 - s0);
            let interp = g[i - 1] * (1.0 - w) + g[i + 1] * w;
            passed &= (g[i] - interp).abs() < 1e-9;
        }
    }
    Ok(ConvexityCheck {
        passed,
        second_differences: diffs,
    })
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
