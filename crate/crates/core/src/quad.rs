//! Quadrature rules: Gauss-Legendre nodes and an adaptive vector integrator.

use crate::error::{Error, Result};
use crate::C64;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed-order rule reused by the adaptive integrator.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        GaussRule { nodes, weights }
    }

    /// Integral of a vector-valued `f` over `[a, b]`.
    pub fn apply<F>(&self, f: &F, a: f64, b: f64, dim: usize) -> Vec<C64>
    where
        F: Fn(f64) -> Vec<C64>,
    {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(m + h * x);
            for (s, vi) in acc.iter_mut().zip(v) {
                *s += vi * (w * h);
            }
        }
        acc
    }
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Adaptive bisection with a 20-point Gauss rule: a panel is accepted when
/// the whole-panel estimate agrees with the sum over its two halves.
pub fn integrate_adaptive<F>(f: &F, a: f64, b: f64, dim: usize, tol: f64) -> Result<Vec<C64>>
where
    F: Fn(f64) -> Vec<C64>,
{
    let rule = GaussRule::new(20);
    let whole = rule.apply(f, a, b, dim);
    let mut total = vec![C64::new(0.0, 0.0); dim];
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut worst: f64 = 0.0;
    let scale = max_norm(&stack[0].2).max(1.0);
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(f, lo, mid, dim);
        let right = rule.apply(f, mid, hi, dim);
        let refined: Vec<C64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let err = max_diff(&est, &refined);
        let local_tol = tol * scale * ((hi - lo) / (b - a)).max(1e-3);
        if err <= local_tol || depth >= 40 {
            if depth >= 40 {
                worst = worst.max(err);
            }
            for (t, r) in total.iter_mut().zip(refined) {
                *t += r;
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    if worst > tol * scale * 1e3 {
        return Err(Error::QuadratureNonConvergence(worst));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let i18: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((i18 - 2.0 / 19.0).abs() < 1e-14);
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
    }

    #[test]
    fn adaptive_handles_endpoint_sqrt() {
        let f = |t: f64| vec![C64::new(t.sqrt(), 0.0), C64::new(0.0, t.exp())];
        let v = integrate_adaptive(&f, 0.0, 1.0, 2, 1e-13).unwrap();
        assert!((v[0].re - 2.0 / 3.0).abs() < 1e-12);
        assert!((v[1].im - (1f64.exp() - 1.0)).abs() < 1e-13);
    }
}
