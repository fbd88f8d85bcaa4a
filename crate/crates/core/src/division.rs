//! Division polynomials: the Toeplitz (Cantor) and Wronskian (Kiepert)
//! determinants, the polynomial parts `alpha_n`, their root sets and the
//! torsion candidates that produce periodic Toda frames.

use crate::addition::reduce_divisor;
use crate::curve::{HyperellipticCurve, Point};
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::periods::lattice_distance;
use crate::poly::ComplexPolynomial;
use crate::sigma::SigmaContext;
use crate::toda::TodaFrame;
use crate::C64;
use serde::Serialize;

/// `psi_n = (2y)^e alpha_n(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionPolynomial {
    pub n: usize,
    pub y_exponent: usize,
    pub alpha: ComplexPolynomial,
    /// Overall sign; the Toeplitz form is used with `+1`.
    pub sign: f64,
}

/// The exponent `e` of `2y` split off `psi_n`.
pub fn y_exponent(g: usize, n: usize) -> usize {
    if n > g + 1 {
        if (n - g) % 2 == 1 {
            g * (g + 1) / 2
        } else {
            g * (g - 1) / 2
        }
    } else {
        n * (n - 1) / 2
    }
}

/// `deg alpha_n` for `n >= g + 2`; zero below.
pub fn expected_degree(g: usize, n: usize) -> usize {
    if n < g + 2 {
        return 0;
    }
    let base = g * (n + g) * (n - g);
    if (n - g) % 2 == 1 {
        (base - g * (2 * g + 1)) / 2
    } else {
        base / 2
    }
}

/// Toeplitz parameters `(m, k)` with `psi_n = (2y)^{n(n-1)/2} T_k^{(m)}`;
/// `k < 0` means `T = 1`.
fn toeplitz_params(g: usize, n: usize) -> (usize, i64) {
    let (n, gi) = (n as i64, g as i64);
    if (n - gi).rem_euclid(2) == 1 {
        (g + 2, (n - gi - 1).div_euclid(2))
    } else {
        (g + 1, (n - gi).div_euclid(2))
    }
}

fn toeplitz_det<T: Clone>(k: usize, m: usize, entry: impl Fn(usize) -> T, det_fn: impl Fn(Vec<Vec<T>>) -> T, one: T) -> T {
    if k == 0 {
        return one;
    }
    let rows = (0..k)
        .map(|r| (0..k).map(|c| entry(m + k - 1 + r - c)).collect())
        .collect();
    det_fn(rows)
}

/// `psi_n` at an affine non-branch point from the Toeplitz determinant of
/// the Taylor coefficients of `y(x)`.
pub fn cantor_psi(curve: &HyperellipticCurve, n: usize, p: Point) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let (m, k) = toeplitz_params(curve.genus(), n);
    let pre = (p.y * 2.0).powi((n * (n - 1) / 2) as i32);
    if k <= 0 {
        return Ok(pre);
    }
    let k = k as usize;
    let jet = curve.y_jet(p.x, p.y, m + 2 * k)?;
    let t = toeplitz_det(
        k,
        m,
        |j| jet[j],
        |rows| det(&CMatrix::from_fn(k, k, |r, c| rows[r][c])),
        C64::new(1.0, 0.0),
    );
    Ok(pre * t)
}

/// `Y_j = y^{2j-1} y^{[j]}` as polynomials in `x`, `j = 0..=jmax`.
pub fn cleared_y_jets(curve: &HyperellipticCurve, jmax: usize) -> Vec<ComplexPolynomial> {
    let f = curve.f_poly();
    let mut ftaylor = vec![f.clone()];
    for _ in 1..=jmax {
        let d = ftaylor.last().unwrap().derivative();
        ftaylor.push(d);
    }
    let mut fpow = vec![ComplexPolynomial::one()];
    for j in 1..jmax.max(1) {
        fpow.push(&fpow[j - 1] * f);
    }
    let mut y: Vec<ComplexPolynomial> = vec![ComplexPolynomial::one()];
    let mut fact = 1.0;
    for j in 1..=jmax {
        fact *= j as f64;
        let fj = ftaylor[j].scale(C64::new(1.0 / fact, 0.0));
        let mut s = &fj * &fpow[j - 1];
        for i in 1..j {
            s = &s - &(&y[i] * &y[j - i]);
        }
        y.push(s.scale(C64::new(0.5, 0.0)));
    }
    y
}

fn poly_det(rows: Vec<Vec<ComplexPolynomial>>) -> ComplexPolynomial {
    let k = rows.len();
    if k == 1 {
        return rows[0][0].clone();
    }
    let mut acc = ComplexPolynomial::zero();
    for c in 0..k {
        let minor: Vec<Vec<ComplexPolynomial>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &rows[0][c] * &poly_det(minor);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

/// `alpha_n(x)` as an exact polynomial from the y-cleared Toeplitz
/// determinant, with its degree certified against the closed formula.
pub fn cantor_alpha(curve: &HyperellipticCurve, n: usize) -> Result<DivisionPolynomial> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let g = curve.genus();
    let e = y_exponent(g, n);
    let (m, k) = toeplitz_params(g, n);
    let k = k.max(0) as usize;
    let b = if k == 0 { 0 } else { k * (2 * m + 2 * k - 3) };
    let half = n * (n - 1) / 2;
    let d = half as i64 - b as i64 - e as i64;
    if d % 2 != 0 {
        return Err(Error::DegreeMismatch { n, expected: expected_degree(g, n), got: usize::MAX });
    }
    let det_y = if k == 0 {
        ComplexPolynomial::one()
    } else {
        let ys = cleared_y_jets(curve, m + 2 * k);
        toeplitz_det(k, m, |j| ys[j].clone(), poly_det, ComplexPolynomial::one())
    };
    let mut alpha = det_y.scale(C64::new(2f64.powi(half as i32 - e as i32), 0.0));
    let fpow = curve.f_poly().pow((d.unsigned_abs() / 2) as usize);
    if d > 0 {
        alpha = &alpha * &fpow;
    } else if d < 0 {
        let (q, r) = alpha.div_rem(&fpow);
        if r.max_abs_coeff() > 1e-9 * alpha.max_abs_coeff() {
            return Err(Error::DegreeMismatch { n, expected: expected_degree(g, n), got: alpha.degree() });
        }
        alpha = q;
    }
    let alpha = alpha.trimmed(1e-12);
    let expected = expected_degree(g, n);
    if alpha.degree() != expected {
        return Err(Error::DegreeMismatch { n, expected, got: alpha.degree() });
    }
    Ok(DivisionPolynomial { n, y_exponent: e, alpha, sign: 1.0 })
}

fn series_mul(a: &[C64], b: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    for (i, x) in a.iter().enumerate().take(len) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_recip(a: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    out[0] = C64::new(1.0, 0.0) / a[0];
    for k in 1..len {
        let s: C64 = (1..=k.min(a.len() - 1)).map(|j| a[j] * out[k - j]).sum();
        out[k] = -s * out[0];
    }
    out
}

/// `a(h(s))` for `h(0) = 0`, truncated to `len` terms.
fn series_compose(a: &[C64], h: &[C64], len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    let mut pw = vec![C64::new(0.0, 0.0); len];
    pw[0] = C64::new(1.0, 0.0);
    for (j, aj) in a.iter().enumerate().take(len) {
        if j > 0 {
            pw = series_mul(&pw, h, len);
        }
        for k in 0..len {
            out[k] += aj * pw[k];
        }
    }
    out
}

/// Coefficients of `(x0 + h)^a`.
fn shifted_power(x0: C64, a: usize, len: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); len];
    let mut binom = 1.0;
    for (k, o) in out.iter_mut().enumerate().take(a.min(len - 1) + 1) {
        if k > 0 {
            binom *= (a - k + 1) as f64 / k as f64;
        }
        *o = x0.powi((a - k) as i32) * binom;
    }
    out
}

/// `psi_n` at `p` from the Wronskian-type determinant of derivatives of
/// `phi_1..phi_{n-1}` along the curve parameter `s` with `dx/ds = 2y`,
/// divided by `1! 2! ... (n-1)!`. Equals the Toeplitz `psi_n` up to sign.
pub fn kiepert_psi(curve: &HyperellipticCurve, n: usize, p: Point) -> Result<C64> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if n == 1 {
        return Ok(C64::new(1.0, 0.0));
    }
    let len = n;
    let yj = curve.y_jet(p.x, p.y, len)?;
    // ds/dh = 1 / (2y); s(h) by termwise integration
    let two_y: Vec<C64> = yj.iter().map(|v| v * 2.0).collect();
    let dsdh = series_recip(&two_y, len);
    let mut s = vec![C64::new(0.0, 0.0); len];
    for k in 1..len {
        s[k] = dsdh[k - 1] / k as f64;
    }
    // revert: h(s) with s(h(s)) = s
    let mut h = vec![C64::new(0.0, 0.0); len];
    h[1] = C64::new(1.0, 0.0) / s[1];
    for _ in 0..len {
        let sh = series_compose(&s, &h, len);
        for k in 1..len {
            let target = if k == 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            h[k] -= (sh[k] - target) / s[1];
        }
    }
    let size = n - 1;
    let mut mat = CMatrix::zeros(size, size);
    for j in 1..=size {
        let (a, has_y) = curve.phi_exponents(j);
        let mut ph = shifted_power(p.x, a, len);
        if has_y {
            ph = series_mul(&ph, &yj, len);
        }
        let ps = series_compose(&ph, &h, len);
        let mut fact = 1.0;
        for kk in 1..=size {
            fact *= kk as f64;
            mat[(kk - 1, j - 1)] = ps[kk] * fact;
        }
    }
    let norm: f64 = (1..n).map(|i| (1..=i).map(|v| v as f64).product::<f64>()).product();
    Ok(det(&mat) / norm)
}

/// Affine zeros of `alpha_n` lifted to both sheets.
pub fn phi_roots(curve: &HyperellipticCurve, n: usize) -> Result<Vec<Point>> {
    let a = cantor_alpha(curve, n)?;
    if a.alpha.degree() == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for x in a.alpha.roots()? {
        let p = curve.lift(x);
        out.push(p);
        if p.y.norm() > 1e-12 {
            out.push(p.involution());
        }
    }
    Ok(out)
}

/// A point of `Xi_{2N}` with the distances of its abscissa to the nearest
/// root of each `alpha_m`, `m = 2N-g+1 ..= 2N+g-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionCandidate {
    pub point: Point,
    pub order_target: usize,
    pub residuals: Vec<f64>,
}

/// Relative tolerance for matching roots across the `alpha_m`.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Points of `Xi_{2N}`, the common zeros of the window of `alpha_m`.
pub fn xi_set(curve: &HyperellipticCurve, n: usize) -> Result<Vec<TorsionCandidate>> {
    let g = curve.genus();
    let two_n = 2 * n;
    if two_n <= g {
        return Err(Error::InvalidInput("2N must exceed the genus".into()));
    }
    let window: Vec<usize> = (two_n + 1 - g..=two_n + g - 1).collect();
    let mut roots = Vec::with_capacity(window.len());
    for &m in &window {
        let a = cantor_alpha(curve, m)?;
        roots.push(if a.alpha.degree() == 0 { Vec::new() } else { a.alpha.roots()? });
    }
    let centre = window.iter().position(|&m| m == two_n).unwrap();
    let mut out = Vec::new();
    for &x in &roots[centre] {
        let residuals: Vec<f64> = roots
            .iter()
            .map(|rs| rs.iter().map(|r| (r - x).norm() / x.norm().max(1.0)).fold(f64::INFINITY, f64::min))
            .collect();
        if residuals.iter().all(|&r| r < CLUSTER_TOL) {
            let p = curve.lift(x);
            out.push(TorsionCandidate { point: p, order_target: two_n, residuals: residuals.clone() });
            if p.y.norm() > 1e-12 {
                out.push(TorsionCandidate { point: p.involution(), order_target: two_n, residuals });
            }
        }
    }
    Ok(out)
}

/// The Toda frame with step `c = 2 w(P)` for a torsion candidate, flagged
/// periodic with period `N` once `N c` is certified to lie in the lattice.
pub fn torsion_to_frame(ctx: &SigmaContext, cand: &TorsionCandidate, n: usize, t_perp: Vec<C64>) -> Result<TodaFrame> {
    let g = ctx.genus();
    if 2 * n < 2 * g + 1 {
        return Err(Error::InvalidInput(format!("2N = {} is below 2g + 1 = {}", 2 * n, 2 * g + 1)));
    }
    let mut frame = TodaFrame::new(ctx, cand.point, t_perp)?;
    let dist = lattice_residual(ctx, &frame.c, n)?;
    if dist > 1e-6 {
        return Err(Error::NotTorsion(n, dist));
    }
    frame.period = Some(n);
    Ok(frame)
}

/// Distance of `N c` to the period lattice.
pub fn lattice_residual(ctx: &SigmaContext, c: &[C64], n: usize) -> Result<f64> {
    let nc: Vec<C64> = c.iter().map(|z| z * n as f64).collect();
    lattice_distance(&ctx.periods, &nc)
}

/// `|p(x)| / sum |a_k| |x|^k`: zero exactly when `x - x0` divides `p` in
/// exact arithmetic, and of order `eps` for a floating-point root.
pub fn backward_error(p: &ComplexPolynomial, x: C64) -> f64 {
    let r = x.norm();
    let scale = p.coeffs().iter().rev().fold(0.0, |acc, c| acc * r + c.norm());
    p.eval(x).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Outcome of the divisibility test: for each `m`, the largest backward
/// error of `alpha_m` at the abscissae of the multiples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divisibility {
    pub multiples: Vec<Point>,
    pub remainders: Vec<(usize, f64)>,
    pub divides: bool,
}

fn same_point(a: Point, b: Point, tol: f64) -> bool {
    (a.x - b.x).norm() < tol && (a.y - b.y).norm() < tol
}

/// `l P` for `l = 1..=count` through divisor reduction; `None` marks the
/// point at infinity.
pub fn multiples(curve: &HyperellipticCurve, p: Point, count: usize) -> Result<Vec<Option<Point>>> {
    if curve.genus() != 1 {
        return Err(Error::Unsupported("multiples by reduction are implemented in genus one"));
    }
    let tol = 1e-6 * curve.scale();
    // y near a branch point carries sqrt(eps) error; snap to the 2-torsion point
    let snap = |q: Point| -> Point {
        if q.y.norm() < tol {
            if let Some(b) = curve.branch_points().iter().min_by(|a, b| (*a - q.x).norm().total_cmp(&(*b - q.x).norm())) {
                if (b - q.x).norm() < tol.sqrt() {
                    return Point::new(*b, C64::new(0.0, 0.0));
                }
            }
        }
        q
    };
    let mut out: Vec<Option<Point>> = vec![Some(p)];
    for _ in 1..count {
        let next = match *out.last().unwrap() {
            None => Some(p),
            Some(q) if same_point(q, p.involution(), tol) => None,
            Some(q) => {
                let red = reduce_divisor(curve, &[p, q])?;
                Some(snap(red.neg[0]))
            }
        };
        out.push(next);
    }
    Ok(out)
}

/// In genus one, checks that `prod (x - x(l P))` over the distinct affine,
/// non-2-torsion multiples `l = 1..=2N` divides `alpha_{2N}`, i.e. that every
/// factor root is a root of `alpha_{2N}` to backward error `1e-10`.
pub fn divisibility_check(curve: &HyperellipticCurve, cand: &TorsionCandidate, n: usize) -> Result<Divisibility> {
    let g = curve.genus();
    if g != 1 {
        return Err(Error::Unsupported("divisibility check is implemented in genus one"));
    }
    let tol = 1e-6 * curve.scale();
    let mult = multiples(curve, cand.point, 2 * n)?;
    for i in 0..mult.len() {
        for j in 0..i {
            let same = match (mult[i], mult[j]) {
                (None, None) => true,
                (Some(a), Some(b)) => same_point(a, b, tol),
                _ => false,
            };
            if same {
                return Err(Error::MultiplesNotDistinct);
            }
        }
    }
    let pts: Vec<Point> = mult.iter().flatten().copied().collect();
    let mut xs: Vec<C64> = Vec::new();
    for p in &pts {
        if p.y.norm() > tol && xs.iter().all(|x| (x - p.x).norm() > tol) {
            xs.push(p.x);
        }
    }
    let mut remainders = Vec::new();
    for m in (2 * n + 1 - g)..=(2 * n + g - 1) {
        let a = cantor_alpha(curve, m)?.alpha;
        remainders.push((m, xs.iter().map(|&x| backward_error(&a, x)).fold(0.0, f64::max)));
    }
    let divides = remainders.iter().all(|(_, r)| *r < 1e-10);
    Ok(Divisibility { multiples: pts, remainders, divides })
}
