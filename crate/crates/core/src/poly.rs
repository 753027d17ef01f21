//! Dense univariate polynomials with arbitrary-precision integer
//! coefficients, plus the exact algebra needed for generating functions:
//! gcd, exact rational division, square-free decomposition and numeric
//! root isolation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficients in ascending order; no trailing zeros (the zero polynomial
/// is the empty vector).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// `count · x^exp`
    pub fn monomial(count: i64, exp: usize) -> Self {
        let mut c = vec![BigInt::zero(); exp + 1];
        c[exp] = BigInt::from(count);
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        eval_complex_coeffs(&self.to_f64(), x)
    }

    pub fn eval_bigint(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// gcd of the coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divides out the content and normalizes the leading coefficient to be
    /// positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.leading().is_some_and(Signed::is_negative) {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Pseudo-remainder `prem(self, divisor)`.
    pub fn pseudo_rem(&self, divisor: &Self) -> Self {
        let db = divisor
            .degree()
            .expect("pseudo-division by zero polynomial");
        let lead = divisor.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        while r.len() > db && !r.is_empty() {
            let shift = r.len() - 1 - db;
            let top = r.last().unwrap().clone();
            for c in r.iter_mut() {
                *c *= &lead;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                r[i + shift] -= &top * d;
            }
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        Self::new(r)
    }

    /// Primitive gcd (content-free, positive leading coefficient).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.primitive(), other.primitive());
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b);
            a = b;
            b = r.primitive();
        }
        a.primitive()
    }

    /// Exact quotient over the rationals. Fails if the remainder is nonzero.
    pub fn div_exact_q(&self, divisor: &Self) -> Result<RatPoly> {
        let (q, r) = RatPoly::from_int(self).div_rem(&RatPoly::from_int(divisor));
        if !r.is_zero() {
            return Err(Error::Expansion("inexact polynomial division".into()));
        }
        Ok(q)
    }

    /// Exact quotient over the integers, if it exists.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let q = self.div_exact_q(divisor).ok()?;
        q.to_int()
    }
}

fn eval_complex_coeffs(coeffs: &[f64], x: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::zero(), |acc, &c| acc * x + c)
}

impl Add for &IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::new(out)
    }
}

impl Sub for &IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &IntPoly) -> IntPoly {
        self + &(-rhs)
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{a}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Rational-coefficient polynomial, used only as an intermediate for exact
/// division.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        Self::new(coeffs)
    }

    pub fn from_int(p: &IntPoly) -> Self {
        Self::new(
            p.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let db = divisor.coeffs.len() - 1;
        let lead = divisor.coeffs[db].clone();
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Self::new(Vec::new()), Self::new(r));
        }
        let mut q = vec![BigRational::zero(); r.len() - db];
        for k in (0..q.len()).rev() {
            let factor = &r[k + db] / &lead;
            if !factor.is_zero() {
                for (i, d) in divisor.coeffs.iter().enumerate() {
                    r[k + i] -= &factor * d;
                }
            }
            q[k] = factor;
        }
        (Self::new(q), Self::new(r))
    }

    /// Integer polynomial if all coefficients are integers.
    pub fn to_int(&self) -> Option<IntPoly> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect::<Option<Vec<_>>>()
            .map(IntPoly::new)
    }

    /// Multiplies by the lcm of denominators.
    pub fn clear_denominators(&self) -> (IntPoly, BigInt) {
        let l = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let scale = BigRational::from_integer(l.clone());
        let p = IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| (c * &scale).to_integer())
                .collect(),
        );
        (p, l)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

/// Square-free decomposition: returns `(factor, multiplicity)` pairs of
/// primitive square-free, pairwise coprime polynomials of positive degree
/// whose product (with multiplicities) equals `p` up to a constant.
pub fn square_free_decomposition(p: &IntPoly) -> Result<Vec<(IntPoly, usize)>> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return Ok(out);
    }
    // Yun's algorithm with integer polynomials; `b` and `c` share one scale.
    let f = p.primitive();
    let fp = f.derivative();
    let a0 = f.gcd(&fp);
    let (mut b, mut c) = common_scale(&f.div_exact_q(&a0)?, &fp.div_exact_q(&a0)?);
    let mut d = &c - &b.derivative();
    let mut mult = 1;
    while b.degree().unwrap_or(0) > 0 {
        let a = b.gcd(&d);
        if a.degree().unwrap_or(0) > 0 {
            out.push((a.clone(), mult));
        }
        let b_next = b.div_exact_q(&a)?;
        let c_next = if d.is_zero() {
            RatPoly::new(Vec::new())
        } else {
            d.div_exact_q(&a)?
        };
        (b, c) = common_scale(&b_next, &c_next);
        d = &c - &b.derivative();
        mult += 1;
        if mult > p.coeffs.len() + 1 {
            return Err(Error::Expansion(
                "square-free decomposition did not terminate".into(),
            ));
        }
    }
    Ok(out)
}

/// Multiplies two rational polynomials by one common integer so both become
/// integral.
fn common_scale(a: &RatPoly, b: &RatPoly) -> (IntPoly, IntPoly) {
    let l = a
        .coeffs
        .iter()
        .chain(b.coeffs.iter())
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let s = BigRational::from_integer(l);
    let conv = |p: &RatPoly| IntPoly::new(p.coeffs.iter().map(|c| (c * &s).to_integer()).collect());
    (conv(a), conv(b))
}

/// All complex roots of a square-free polynomial: companion-matrix
/// eigenvalues polished by Newton's method.
pub fn roots_square_free(p: &IntPoly) -> Result<Vec<Complex64>> {
    let deg = match p.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(d) => d,
    };
    let c = p.to_f64();
    let lead = c[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -c[i] / lead;
    }
    let eig = comp.complex_eigenvalues();
    let dc: Vec<f64> = p.derivative().to_f64();
    let roots = eig
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..50 {
                let fz = eval_complex_coeffs(&c, z);
                let dz = eval_complex_coeffs(&dc, z);
                if dz.norm() == 0.0 {
                    break;
                }
                let step = fz / dz;
                z -= step;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect::<Vec<_>>();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Expansion(
            "root finder produced non-finite roots".into(),
        ));
    }
    Ok(roots)
}

/// Taylor coefficients of a real-coefficient polynomial about a complex
/// point, `p(r + δ) = Σ_k out[k] δ^k`.
pub fn taylor_shift(coeffs: &[f64], r: Complex64) -> Vec<Complex64> {
    let mut a: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let n = a.len();
    // Repeated synthetic division by (x - r).
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let t = a[j + 1] * r;
            a[j] += t;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    #[test]
    fn arithmetic_and_display() {
        let a = p(&[1, -1]);
        let b = p(&[1, -1, -1]);
        let prod = &a * &b;
        assert_eq!(prod, p(&[1, -2, 0, 1]));
        assert_eq!(prod.to_string(), "1 - 2x + x^3");
        assert_eq!((&prod - &prod), IntPoly::zero());
        assert_eq!(prod.derivative(), p(&[-2, 0, 3]));
    }

    #[test]
    fn gcd_finds_common_factor() {
        let f = &p(&[1, -1, -1]) * &p(&[1, 1, -1]);
        let g = &p(&[1, -1, -1]) * &p(&[2, 3]);
        let d = f.gcd(&g);
        assert_eq!(d, p(&[-1, 1, 1]));
        assert_eq!(p(&[2, 4]).gcd(&p(&[3, 6])), p(&[1, 2]));
    }

    #[test]
    fn exact_division() {
        let f = &p(&[1, -1]) * &p(&[3, 0, 2]);
        assert_eq!(f.div_exact(&p(&[1, -1])).unwrap(), p(&[3, 0, 2]));
        assert!(f.div_exact(&p(&[1, 1])).is_none());
        let q = p(&[1, 0, 1]).div_exact_q(&p(&[2]));
        assert!(q.unwrap().to_int().is_none());
    }

    #[test]
    fn square_free_multiplicities() {
        // (1 - x)^3 (1 + x + x^2)^2 (2 - x)
        let a = p(&[1, -1]);
        let b = p(&[1, 1, 1]);
        let c = p(&[2, -1]);
        let f = &(&(&(&a * &a) * &a) * &(&b * &b)) * &c;
        let mut sf = square_free_decomposition(&f).unwrap();
        sf.sort_by_key(|(_, m)| *m);
        let degs: Vec<(usize, usize)> = sf.iter().map(|(q, m)| (q.degree().unwrap(), *m)).collect();
        assert_eq!(degs, vec![(1, 1), (2, 2), (1, 3)]);
        assert_eq!(sf[0].0, c.primitive());
        assert_eq!(sf[2].0, a.primitive());
    }

    #[test]
    fn roots_of_golden_quadratic() {
        let mut r = roots_square_free(&p(&[1, -1, -1])).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let s5 = 5f64.sqrt();
        assert!((r[0].re + (1.0 + s5) / 2.0).abs() < 1e-14);
        assert!((r[1].re - (s5 - 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        // p(x) = 1 + 2x + 3x^2 about r = 2: p(2)=17, p'(2)=14, p''(2)/2=3
        let t = taylor_shift(&[1.0, 2.0, 3.0], Complex64::new(2.0, 0.0));
        assert_eq!(
            t.iter().map(|z| z.re).collect::<Vec<_>>(),
            vec![17.0, 14.0, 3.0]
        );
    }
}
