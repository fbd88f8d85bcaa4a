//! Riemann theta series with half-integer characteristics and termwise
//! directional derivatives.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Half-integer characteristics: `a` shifts the summation index, `b` shifts
/// the argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Characteristics {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        let red = |v: Vec<f64>| v.into_iter().map(|x| (2.0 * x).rem_euclid(2.0) / 2.0).collect();
        Characteristics { a: red(a), b: red(b) }
    }

    /// All `4^g` half-integer characteristics.
    pub fn all(g: usize) -> Vec<Self> {
        (0..1usize << (2 * g))
            .map(|m| {
                let a = (0..g).map(|i| 0.5 * ((m >> i) & 1) as f64).collect();
                let b = (0..g).map(|i| 0.5 * ((m >> (g + i)) & 1) as f64).collect();
                Characteristics { a, b }
            })
            .collect()
    }

    /// `+1` for even, `-1` for odd characteristics.
    pub fn parity(&self) -> i32 {
        let s: f64 = self.a.iter().zip(&self.b).map(|(a, b)| 4.0 * a * b).sum();
        if (s.round() as i64) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Summation policy for the theta series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPolicy {
    /// Cutoff for the relative size of the neglected tail.
    pub tol: f64,
    /// Extra shells added on top of the Gaussian radius.
    pub extra: usize,
}

impl Default for ThetaPolicy {
    fn default() -> Self {
        ThetaPolicy { tol: 1e-16, extra: 2 }
    }
}

/// `ceil(sqrt(-ln tol / (pi lambda_min))) + extra`, `lambda_min` the smallest
/// eigenvalue of `Im T`.
pub fn truncation_radius(t: &CMatrix, policy: &ThetaPolicy) -> usize {
    let lmin = crate::periods::imag_min_eigenvalue(t);
    ((-policy.tol.ln() / (PI * lmin)).sqrt().ceil() as usize) + policy.extra
}

/// Values of the theta series with directional derivatives. `sums[mask]` is
/// the derivative of `theta[a; b](z; T)` along the directions selected by the
/// bits of `mask`; `tail` is the relative weight of the outermost shell.
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub sums: Vec<C64>,
    pub tail: f64,
    /// Sum of the moduli of all terms, the natural scale for cancellation.
    pub mass: f64,
}

/// Summation of the theta series and all its mixed derivatives along `dirs`
/// in one pass, centred at the lattice point nearest to the Gaussian peak.
pub fn theta_jet(
    ch: &Characteristics,
    z: &[C64],
    t: &CMatrix,
    dirs: &[Vec<C64>],
    radius: usize,
) -> Result<ThetaJet> {
    let g = z.len();
    let k = dirs.len();
    let y = DMatrix::from_fn(g, g, |i, j| t[(i, j)].im);
    let yinv = y
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("Im T is singular".into()))?;
    let imz = nalgebra::DVector::from_iterator(g, z.iter().map(|c| c.im));
    let peak = -(&yinv * imz);
    let n0: Vec<i64> = (0..g).map(|i| (peak[i] - ch.a[i]).round() as i64).collect();

    let r = radius as i64;
    let width = (2 * r + 1) as usize;
    let count = width.pow(g as u32);
    let mut sums = vec![C64::new(0.0, 0.0); 1 << k];
    let mut total_abs = 0.0;
    let mut shell_abs = 0.0;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let mut m = vec![0i64; g];
    let mut na = vec![0.0; g];
    let mut factors = vec![C64::new(0.0, 0.0); k];
    for idx in 0..count {
        let mut rem = idx;
        let mut on_shell = false;
        for i in 0..g {
            m[i] = (rem % width) as i64 - r;
            rem /= width;
            on_shell |= m[i].abs() == r;
            na[i] = (n0[i] + m[i]) as f64 + ch.a[i];
        }
        let mut ex = C64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..g {
                row += t[(i, j)] * na[j];
            }
            ex += na[i] * (row * 0.5 + z[i] + ch.b[i]);
        }
        let term = (two_pi_i * ex).exp();
        let mag = term.norm();
        total_abs += mag;
        if on_shell {
            shell_abs += mag;
        }
        for (f, d) in factors.iter_mut().zip(dirs) {
            let s: C64 = na.iter().zip(d).map(|(n, di)| di * *n).sum();
            *f = two_pi_i * s;
        }
        // products over subsets, built up bit by bit
        sums[0] += term;
        let mut prod = vec![C64::new(0.0, 0.0); 1 << k];
        prod[0] = term;
        for mask in 1usize..1 << k {
            let low = mask.trailing_zeros() as usize;
            prod[mask] = prod[mask & (mask - 1)] * factors[low];
            sums[mask] += prod[mask];
        }
    }
    let tail = if total_abs > 0.0 { shell_abs / total_abs } else { 0.0 };
    Ok(ThetaJet { sums, tail, mass: total_abs })
}

fn checked(jet: ThetaJet, tol: f64) -> Result<ThetaJet> {
    if jet.tail > tol {
        Err(Error::TruncationInsufficient(jet.tail))
    } else {
        Ok(jet)
    }
}

/// `theta[a; b](z; T)` truncated to `|n - n0|_inf <= radius`.
pub fn theta_char(ch: &Characteristics, z: &[C64], t: &CMatrix, radius: usize, tol: f64) -> Result<C64> {
    Ok(checked(theta_jet(ch, z, t, &[], radius)?, tol)?.sums[0])
}

/// Partial derivative of the theta series; `multi_index` lists coordinate
/// indices, repeated for higher order.
pub fn theta_deriv(
    multi_index: &[usize],
    ch: &Characteristics,
    z: &[C64],
    t: &CMatrix,
    radius: usize,
    tol: f64,
) -> Result<C64> {
    let g = z.len();
    let dirs: Vec<Vec<C64>> = multi_index
        .iter()
        .map(|&i| (0..g).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
        .collect();
    let jet = checked(theta_jet(ch, z, t, &dirs, radius)?, tol)?;
    Ok(*jet.sums.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tmat(v: &[C64], g: usize) -> CMatrix {
        CMatrix::from_row_slice(g, g, v)
    }

    fn g2_t() -> CMatrix {
        tmat(
            &[C64::new(-0.3, 1.1), C64::new(0.2, 0.35), C64::new(0.2, 0.35), C64::new(0.45, 0.9)],
            2,
        )
    }

    #[test]
    fn trivial_values() {
        let t = tmat(&[C64::new(0.0, 10.0)], 1);
        let even = Characteristics::new(vec![0.0], vec![0.0]);
        let v = theta_char(&even, &[C64::new(0.0, 0.0)], &t, 4, 1e-12).unwrap();
        let want = 1.0 + 2.0 * (-10.0 * PI).exp();
        assert!((v - want).norm() < 1e-15);
        let odd = Characteristics::new(vec![0.5], vec![0.5]);
        assert!(theta_char(&odd, &[C64::new(0.0, 0.0)], &t, 4, 1e-12).unwrap().norm() < 1e-15);
        assert_eq!(odd.parity(), -1);
        assert_eq!(Characteristics::all(2).iter().filter(|c| c.parity() == -1).count(), 6);
    }

    #[test]
    fn shift_by_integer_vector() {
        let t = g2_t();
        let r = truncation_radius(&t, &ThetaPolicy::default());
        for ch in Characteristics::all(2) {
            let z = [C64::new(0.13, -0.2), C64::new(-0.31, 0.17)];
            let base = theta_char(&ch, &z, &t, r, 1e-12).unwrap();
            let shifted = theta_char(&ch, &[z[0], z[1] + 1.0], &t, r, 1e-12).unwrap();
            let phase = C64::new(0.0, 2.0 * PI * ch.a[1]).exp();
            assert!((shifted - phase * base).norm() < 1e-12);
        }
    }

    #[test]
    fn insufficient_truncation_is_reported() {
        let t = g2_t();
        let ch = Characteristics::new(vec![0.0, 0.0], vec![0.0, 0.0]);
        let r = theta_char(&ch, &[C64::new(0.0, 0.0); 2], &t, 0, 1e-12);
        assert!(matches!(r, Err(Error::TruncationInsufficient(_))));
    }

    #[test]
    fn derivative_properties() {
        let t = g2_t();
        let r = truncation_radius(&t, &ThetaPolicy::default());
        let even = Characteristics::new(vec![0.0, 0.5], vec![0.0, 0.0]);
        let zero = [C64::new(0.0, 0.0); 2];
        assert!(theta_deriv(&[1], &even, &zero, &t, r, 1e-12).unwrap().norm() < 1e-13);
        let z = [C64::new(0.1, 0.05), C64::new(-0.2, 0.1)];
        assert_eq!(
            theta_deriv(&[], &even, &z, &t, r, 1e-12).unwrap(),
            theta_char(&even, &z, &t, r, 1e-12).unwrap()
        );
        let h = 1e-5;
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let exact = theta_deriv(&[i, j], &even, &z, &t, r, 1e-12).unwrap();
            let at = |di: f64, dj: f64| {
                let mut w = z;
                w[i] += di;
                w[j] += dj;
                theta_char(&even, &w, &t, r, 1e-12).unwrap()
            };
            let fd = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
            assert!((exact - fd).norm() < 1e-4, "{i}{j}: {exact} {fd}");
            let first = theta_deriv(&[i], &even, &z, &t, r, 1e-12).unwrap();
            let fd1 = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h);
            assert!((first - fd1).norm() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn parity_of_characteristic(re in -0.5f64..0.5, im in -0.5f64..0.5) {
            let t = g2_t();
            let r = truncation_radius(&t, &ThetaPolicy::default());
            let z = [C64::new(re, im), C64::new(im, -re)];
            let mz = [-z[0], -z[1]];
            for ch in Characteristics::all(2) {
                let p = theta_char(&ch, &z, &t, r, 1e-12).unwrap();
                let m = theta_char(&ch, &mz, &t, r, 1e-12).unwrap();
                prop_assert!((m - p * f64::from(ch.parity())).norm() < 1e-12 * (1.0 + p.norm()));
            }
        }
    }
}
