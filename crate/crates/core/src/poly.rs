//! Dense univariate polynomials over the complex numbers and a simultaneous
//! (Aberth–Ehrlich) root finder.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Polynomial with coefficients stored in ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<C64>,
}

/// Iteration cap used by [`ComplexPolynomial::roots`].
pub const ROOT_MAX_ITER: usize = 200;
/// Relative correction size at which a root is considered converged.
pub const ROOT_TOL: f64 = 1e-13;

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut p = ComplexPolynomial { coeffs };
        p.trim_exact();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// Monic polynomial with the given roots, `prod (x - r)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut p = Self::one();
        for &r in roots {
            p = &p * &Self::new(vec![-r, C64::new(1.0, 0.0)]);
        }
        p
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> C64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last().is_some_and(|c| *c == C64::new(0.0, 0.0)) {
            self.coeffs.pop();
        }
    }

    /// Drops leading coefficients smaller than `rel_tol` times the largest one.
    pub fn trimmed(&self, rel_tol: f64) -> Self {
        let scale = self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= rel_tol * scale) {
            coeffs.pop();
        }
        ComplexPolynomial { coeffs }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, e: usize) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Leading-coefficient normalized copy.
    pub fn monic(&self) -> Self {
        let lc = self.leading();
        self.scale(C64::new(1.0, 0.0) / lc)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree();
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lc = divisor.leading();
        let mut quot = vec![C64::new(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lc;
            quot[k] = q;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// All complex roots by Aberth–Ehrlich iteration, sorted lexicographically
    /// by (real part, imaginary part).
    pub fn roots(&self) -> Result<Vec<C64>> {
        self.roots_with(ROOT_MAX_ITER, ROOT_TOL)
    }

    pub fn roots_with(&self, max_iter: usize, tol: f64) -> Result<Vec<C64>> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let p = self.monic();
        let dp = p.derivative();
        let abs_coeffs: Vec<f64> = p.coeffs.iter().map(|c| c.norm()).collect();
        // roundoff floor of Horner evaluation at |z|
        let eval_floor = |r: f64| 8.0 * f64::EPSILON * abs_coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c);
        // Cauchy-type radius for the initial circle.
        let radius = (0..n)
            .map(|k| p.coeffs[k].norm().powf(1.0 / (n - k) as f64))
            .fold(0.0, f64::max)
            .max(1e-3);
        let mut z: Vec<C64> = (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                C64::from_polar(radius, th)
            })
            .collect();
        let mut converged = vec![false; n];
        for _ in 0..max_iter {
            let mut all = true;
            for k in 0..n {
                if converged[k] {
                    continue;
                }
                let pv = p.eval(z[k]);
                let dv = dp.eval(z[k]);
                if pv.norm() <= eval_floor(z[k].norm()) {
                    converged[k] = true;
                    continue;
                }
                let w = pv / dv;
                let s: C64 = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| C64::new(1.0, 0.0) / (z[k] - z[j]))
                    .sum();
                let step = w / (C64::new(1.0, 0.0) - w * s);
                z[k] -= step;
                if !step.is_finite() {
                    return Err(Error::RootFindFailure(max_iter));
                }
                if step.norm() <= tol * z[k].norm().max(1.0) {
                    converged[k] = true;
                } else {
                    all = false;
                }
            }
            if all {
                // Two Newton polishing steps against the original coefficients.
                for zk in z.iter_mut() {
                    for _ in 0..2 {
                        let dv = dp.eval(*zk);
                        if dv.norm() > 0.0 {
                            let s = p.eval(*zk) / dv;
                            if s.is_finite() {
                                *zk -= s;
                            }
                        }
                    }
                }
                sort_lex(&mut z);
                return Ok(z);
            }
        }
        Err(Error::RootFindFailure(max_iter))
    }
}

/// Sorts complex numbers by real part, then imaginary part.
pub fn sort_lex(z: &mut [C64]) {
    z.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

impl Add for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn add(self, rhs: Self) -> ComplexPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPolynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn sub(self, rhs: Self) -> ComplexPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPolynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn mul(self, rhs: Self) -> ComplexPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPolynomial::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPolynomial::new(out)
    }
}

impl Neg for &ComplexPolynomial {
    type Output = ComplexPolynomial;
    fn neg(self) -> ComplexPolynomial {
        self.scale(C64::new(-1.0, 0.0))
    }
}
