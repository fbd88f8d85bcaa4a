//! Frobenius-Stickelberger determinants, divisor reduction, and two-sided
//! residuals of the hyperelliptic addition formulae.

use crate::abel::abel_map;
use crate::curve::{CurvePoint, HyperellipticCurve, Point};
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::poly::ComplexPolynomial;
use crate::sigma::SigmaContext;
use crate::C64;
use serde::Serialize;

/// Relative residual `|lhs - rhs| / max(|lhs|, |rhs|, 1e-30)`.
pub fn rel_residual(lhs: C64, rhs: C64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1e-30)
}

/// Both sides of an identity and their relative residual. A residual close
/// to 2 with `lhs = -rhs` is flagged as a sign anomaly rather than silently
/// corrected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub sign_anomaly: bool,
}

impl IdentityCheck {
    pub fn new(lhs: C64, rhs: C64) -> Self {
        let residual = rel_residual(lhs, rhs);
        let sign_anomaly = residual > 1.0 && rel_residual(lhs, -rhs) < 1e-4;
        IdentityCheck { lhs, rhs, residual, sign_anomaly }
    }
}

/// Determinant with rows `(phi_0(P_i), ..., phi_{n-1}(P_i))`.
pub fn fs_det(curve: &HyperellipticCurve, pts: &[Point]) -> C64 {
    let n = pts.len();
    let m = CMatrix::from_fn(n, n, |i, j| curve.phi(j, pts[i]));
    det(&m)
}

/// Taylor coefficients in `h` of `phi_j` along the curve at `p` (local
/// coordinate `x`), orders `0..k`.
fn phi_jet(curve: &HyperellipticCurve, j: usize, p: Point, k: usize) -> Result<Vec<C64>> {
    let (a, with_y) = curve.phi_exponents(j);
    // (x0 + h)^a
    let mut xa = vec![C64::new(0.0, 0.0); k];
    let mut binom = 1.0;
    for (r, slot) in xa.iter_mut().enumerate() {
        if r > a {
            break;
        }
        *slot = p.x.powu((a - r) as u32) * binom;
        binom = binom * (a - r) as f64 / (r + 1) as f64;
    }
    if !with_y {
        return Ok(xa);
    }
    let y = curve.y_jet(p.x, p.y, k.saturating_sub(1))?;
    Ok((0..k)
        .map(|r| (0..=r).map(|s| xa[s] * y[r - s]).sum())
        .collect())
}

/// Rows of the confluent determinant: a point of multiplicity `k` contributes
/// its first `k` Taylor rows.
fn confluent_rows(curve: &HyperellipticCurve, pts: &[Point], ncols: usize) -> Result<Vec<Vec<C64>>> {
    let tol = 1e-12 * curve.scale();
    // With only powers of x among the columns, points over the same x are
    // confluent whatever their sheets.
    let pure_x = ncols <= curve.genus() + 1;
    let mut rows = Vec::new();
    let mut seen: Vec<(Point, usize)> = Vec::new();
    for p in pts {
        let k = seen
            .iter_mut()
            .find(|(q, _)| (q.x - p.x).norm() < tol && (pure_x || (q.y - p.y).norm() < tol))
            .map(|(_, k)| {
                *k += 1;
                *k - 1
            })
            .unwrap_or_else(|| {
                seen.push((*p, 1));
                0
            });
        let row: Result<Vec<C64>> = (0..ncols)
            .map(|j| {
                if k == 0 {
                    Ok(curve.phi(j, *p))
                } else {
                    Ok(phi_jet(curve, j, *p, k + 1)?[k])
                }
            })
            .collect();
        rows.push(row?);
    }
    Ok(rows)
}

/// Coefficients `c_j` with `mu_n(P; pts) = sum_j c_j phi_j(P)`: the cofactors
/// of the row of `P`, placed last, divided by the confluent `Psi_n(pts)`.
pub fn mu_coefficients(curve: &HyperellipticCurve, pts: &[Point]) -> Result<Vec<C64>> {
    let n = pts.len();
    let rows = confluent_rows(curve, pts, n + 1)?;
    let base = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let denom = det(&base);
    let scale = rows.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max).powi(n as i32);
    if denom.norm() < 1e-13 * scale {
        return Err(Error::IndeterminateLimit);
    }
    let mut c = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let minor = CMatrix::from_fn(n, n, |r, col| rows[r][if col < j { col } else { col + 1 }]);
        let sign = if (n + j) % 2 == 0 { 1.0 } else { -1.0 };
        c.push(det(&minor) * sign / denom);
    }
    Ok(c)
}

/// `lim Psi_{n+1}(Q_1, ..., Q_n, P) / Psi_n(Q_1, ..., Q_n)` as `Q_i -> P_i`.
pub fn mu_n(curve: &HyperellipticCurve, p: Point, pts: &[Point]) -> Result<C64> {
    let c = mu_coefficients(curve, pts)?;
    Ok(c.iter().enumerate().map(|(j, cj)| cj * curve.phi(j, p)).sum())
}

/// `mu = A(x) + B(x) y` split into its polynomial parts.
pub fn mu_polynomials(curve: &HyperellipticCurve, pts: &[Point]) -> Result<(ComplexPolynomial, ComplexPolynomial)> {
    let c = mu_coefficients(curve, pts)?;
    let mut a = vec![C64::new(0.0, 0.0); c.len() + 1];
    let mut b = vec![C64::new(0.0, 0.0); c.len() + 1];
    for (j, cj) in c.iter().enumerate() {
        let (e, with_y) = curve.phi_exponents(j);
        if with_y {
            b[e] += cj;
        } else {
            a[e] += cj;
        }
    }
    Ok((ComplexPolynomial::new(a), ComplexPolynomial::new(b)))
}

/// Result of reducing `P_1 + ... + P_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Residual zeros `Q_1..Q_l` of `mu_n`.
    pub q: Vec<Point>,
    /// `-Q_i = (x_i, -y_i)`, with `sum P_i ~ sum (-Q_i)`.
    pub neg: Vec<Point>,
}

/// The residual zeros of `mu_n(.; P_1..P_n)` from the norm `A^2 - B^2 f`
/// divided by `prod (x - x_i)`.
pub fn reduce_divisor(curve: &HyperellipticCurve, pts: &[Point]) -> Result<Reduction> {
    let g = curve.genus();
    let n = pts.len();
    let ell = if n >= g { g } else { n };
    let (a, b) = mu_polynomials(curve, pts)?;
    let norm = &(&a * &a) - &(&(&b * &b) * curve.f_poly());
    let norm = norm.trimmed(1e-12);
    let mut rest = norm;
    for p in pts {
        let (q, _) = rest.div_rem(&ComplexPolynomial::from_roots(&[p.x]));
        rest = q;
    }
    if rest.degree() != ell {
        return Err(Error::DegreeMismatch { n, expected: ell, got: rest.degree() });
    }
    let xs = if ell == 0 { Vec::new() } else { rest.roots()? };
    let mut unused: Vec<Point> = pts.to_vec();
    let mut q = Vec::with_capacity(xs.len());
    for &x in &xs {
        let y = curve.f(x).sqrt();
        let r = |y: C64| (a.eval(x) + b.eval(x) * y).norm();
        let scale = (a.max_abs_coeff() + b.max_abs_coeff() * y.norm())
            * (1.0 + x.norm()).powi(a.degree().max(b.degree()) as i32);
        if r(y).max(r(-y)) <= 1e-8 * scale.max(1e-300) {
            // mu vanishes on both sheets: x is shared with some P_i and the
            // residual zero is its mirror image.
            if let Some(k) = unused.iter().position(|p| (p.x - x).norm() < 1e-6 * curve.scale()) {
                let p = unused.remove(k);
                q.push(Point::new(x, -p.y));
                continue;
            }
        }
        q.push(Point::new(x, if r(y) <= r(-y) { y } else { -y }));
    }
    let neg = q.iter().map(|p| p.involution()).collect();
    Ok(Reduction { q, neg })
}

/// `sum_{i,j} wp_{ij}(u) x1^{i-1} x2^{j-1}`.
pub fn wp_form(ctx: &SigmaContext, u: &[C64], x1: C64, x2: C64) -> Result<C64> {
    let w = ctx.wp_matrix(u)?;
    let g = ctx.genus();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            s += w[(i, j)] * x1.powu(i as u32) * x2.powu(j as u32);
        }
    }
    Ok(s)
}

fn sum_u(ctx: &SigmaContext, pts: &[Point]) -> Result<Vec<C64>> {
    let cp: Vec<CurvePoint> = pts.iter().map(|p| CurvePoint::Affine(*p)).collect();
    Ok(abel_map(&ctx.curve, &cp)?.u)
}

fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `epsilon_n` of the Frobenius-Stickelberger formula.
pub fn fs_sign(g: usize, n: usize) -> f64 {
    let e = if n <= g { g + n * (n + 1) / 2 } else { (2 * n - g) * (g - 1) / 2 };
    if e % 2 == 0 { 1.0 } else { -1.0 }
}

/// Both sides of the Frobenius-Stickelberger formula
/// `sigma_{nat^n}(sum u_i) prod_{i<j} sigma_flat(u_i - u_j) / prod sigma_sharp(u_i)^n
///  = eps_n Psi_n`.
pub fn fs_check(ctx: &SigmaContext, pts: &[Point]) -> Result<IdentityCheck> {
    let n = pts.len();
    let us: Vec<Vec<C64>> = pts.iter().map(|p| sum_u(ctx, &[*p])).collect::<Result<_>>()?;
    let total = us.iter().skip(1).fold(us[0].clone(), |acc, u| add(&acc, u));
    let mut lhs = ctx.sigma_natural(n, &total)?;
    for i in 0..n {
        for j in i + 1..n {
            lhs *= ctx.sigma_flat(&sub(&us[i], &us[j]))?;
        }
    }
    for u in &us {
        lhs /= ctx.sigma_sharp(u)?.powu(n as u32);
    }
    let rhs = fs_det(&ctx.curve, pts) * fs_sign(ctx.genus(), n);
    Ok(IdentityCheck::new(lhs, rhs))
}

/// Relative residual of the Frobenius-Stickelberger formula; coincident
/// points make both sides vanish and give 0 by convention.
pub fn fs_residual(ctx: &SigmaContext, pts: &[Point]) -> Result<f64> {
    let tol = 1e-12 * ctx.curve.scale();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if (pts[i].x - pts[j].x).norm() < tol && (pts[i].y - pts[j].y).norm() < tol {
                return Ok(0.0);
            }
        }
    }
    Ok(fs_check(ctx, pts)?.residual)
}

/// The sign `delta(g, m, n)`.
pub fn add_sign(g: usize, m: usize, n: usize) -> f64 {
    if (g * n + n * (n - 1) / 2 + m * n) % 2 == 0 { 1.0 } else { -1.0 }
}

/// Both sides of the general addition theorem for `u = w(P_1..P_m)`,
/// `v = w(Q_1..Q_n)`.
pub fn thm_add_check(ctx: &SigmaContext, m_pts: &[Point], n_pts: &[Point]) -> Result<IdentityCheck> {
    let (m, n) = (m_pts.len(), n_pts.len());
    let curve = &ctx.curve;
    let u = sum_u(ctx, m_pts)?;
    let v = sum_u(ctx, n_pts)?;
    let sm = ctx.sigma_natural(m, &u)?;
    let sn = ctx.sigma_natural(n, &v)?;
    let lhs = ctx.sigma_natural(m + n, &add(&u, &v))? * ctx.sigma_natural(m + n, &sub(&u, &v))?
        / (sm * sm * sn * sn);
    let mut rhs = C64::new(add_sign(ctx.genus(), m, n), 0.0);
    for sheet in [1.0, -1.0] {
        let mut all = m_pts.to_vec();
        all.extend(n_pts.iter().map(|q| Point::new(q.x, q.y * sheet)));
        rhs *= fs_det(curve, &all);
    }
    let dm = fs_det(curve, m_pts) * fs_det(curve, n_pts);
    rhs /= dm * dm;
    for p in m_pts {
        for q in n_pts {
            rhs /= fs_det(curve, &[*p, *q]);
        }
    }
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn thm_add_residual(ctx: &SigmaContext, m_pts: &[Point], n_pts: &[Point]) -> Result<f64> {
    Ok(thm_add_check(ctx, m_pts, n_pts)?.residual)
}

/// The two-term expression `Xi(u, v)` for `u = w(P_1..P_g)` and
/// `v = w(v1) + w(v2)`.
pub fn xi(curve: &HyperellipticCurve, divisor_u: &[Point], v1: Point, v2: Point) -> Result<C64> {
    let xs: Vec<C64> = divisor_u.iter().map(|p| p.x).collect();
    let fpoly = ComplexPolynomial::from_roots(&xs);
    let dfpoly = fpoly.derivative();
    let tol = 1e-12 * curve.scale();
    if (v1.x - v2.x).norm() < tol {
        return Err(Error::ConfluentInput("x'_1 = x'_2"));
    }
    let (f1, f2) = (fpoly.eval(v1.x), fpoly.eval(v2.x));
    if f1.norm() < tol || f2.norm() < tol {
        return Err(Error::ConfluentInput("x_i = x'_j"));
    }
    let mut s1 = C64::new(0.0, 0.0);
    for p in divisor_u {
        let d = dfpoly.eval(p.x);
        if d.norm() < tol {
            return Err(Error::ConfluentInput("repeated x_i"));
        }
        s1 += p.y / ((p.x - v1.x) * (p.x - v2.x) * d);
    }
    let s2 = (-v1.y / f1 + v2.y / f2) / (v1.x - v2.x);
    Ok(f1 * f2 * (s1 * s1 - s2 * s2))
}

/// `sigma(u+v) sigma(u-v) / (sigma(u)^2 sigma_flat(v)^2)`.
fn two_point_ratio(ctx: &SigmaContext, u: &[C64], v: &[C64]) -> Result<C64> {
    let su = ctx.sigma(u)?;
    let sv = ctx.sigma_flat(v)?;
    Ok(ctx.sigma(&add(u, v))? * ctx.sigma(&sub(u, v))? / (su * su * sv * sv))
}

/// Both sides of `sigma(u+v) sigma(u-v) / (sigma(u)^2 sigma_flat(v)^2) = -Xi(u, v)`.
pub fn cor_add_check(ctx: &SigmaContext, divisor_u: &[Point], v1: Point, v2: Point) -> Result<IdentityCheck> {
    let u = sum_u(ctx, divisor_u)?;
    let v = sum_u(ctx, &[v1, v2])?;
    let lhs = two_point_ratio(ctx, &u, &v)?;
    Ok(IdentityCheck::new(lhs, -xi(&ctx.curve, divisor_u, v1, v2)?))
}

/// The right side of Baker's formula for `sum wp_{ij}(u) x1^{i-1} x2^{j-1}`.
pub fn baker_rhs(curve: &HyperellipticCurve, divisor_u: &[Point], x1p: C64, x2p: C64) -> Result<C64> {
    let tol = 1e-12 * curve.scale();
    if (x1p - x2p).norm() < tol {
        return Err(Error::ConfluentInput("x'_1 = x'_2"));
    }
    let xs: Vec<C64> = divisor_u.iter().map(|p| p.x).collect();
    let fpoly = ComplexPolynomial::from_roots(&xs);
    let dfpoly = fpoly.derivative();
    let (f1, f2) = (fpoly.eval(x1p), fpoly.eval(x2p));
    let mut s = C64::new(0.0, 0.0);
    for p in divisor_u {
        s += p.y / ((x1p - p.x) * (x2p - p.x) * dfpoly.eval(p.x));
    }
    let d2 = (x1p - x2p) * (x1p - x2p);
    Ok(f1 * f2 * s * s - curve.f(x1p) * f2 / (d2 * f1) - curve.f(x2p) * f1 / (d2 * f2)
        + curve.baker_f2(x1p, x2p) / d2)
}

pub fn baker_check(ctx: &SigmaContext, divisor_u: &[Point], x1p: C64, x2p: C64) -> Result<IdentityCheck> {
    let u = sum_u(ctx, divisor_u)?;
    let lhs = wp_form(ctx, &u, x1p, x2p)?;
    Ok(IdentityCheck::new(lhs, baker_rhs(&ctx.curve, divisor_u, x1p, x2p)?))
}

/// `(f(x1, x2) - 2 y1 y2) / (x1 - x2)^2`.
pub fn fay_kernel(curve: &HyperellipticCurve, v1: Point, v2: Point) -> Result<C64> {
    if (v1.x - v2.x).norm() < 1e-12 * curve.scale() {
        return Err(Error::ConfluentInput("x'_1 = x'_2"));
    }
    Ok((curve.baker_f2(v1.x, v2.x) - v1.y * v2.y * 2.0) / ((v1.x - v2.x) * (v1.x - v2.x)))
}

/// Both sides of Fay's formula
/// `sigma(u+v) sigma(u-v) / (sigma(u)^2 sigma_flat(v)^2) = K(v1, v2) - sum wp_{ij} x1^{i-1} x2^{j-1}`.
pub fn fay_check(ctx: &SigmaContext, divisor_u: &[Point], v1: Point, v2: Point) -> Result<IdentityCheck> {
    let u = sum_u(ctx, divisor_u)?;
    let v = sum_u(ctx, &[v1, v2])?;
    let lhs = two_point_ratio(ctx, &u, &v)?;
    let rhs = fay_kernel(&ctx.curve, v1, v2)? - wp_form(ctx, &u, v1.x, v2.x)?;
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn fay_residual(ctx: &SigmaContext, divisor_u: &[Point], v1: Point, v2: Point) -> Result<f64> {
    Ok(fay_check(ctx, divisor_u, v1, v2)?.residual)
}

/// Both sides of the doubled-point formula
/// `sigma(u+2v) sigma(u-2v) / (sigma(u)^2 sigma_flat(2v)^2) = f_{1,2}(x') - sum wp_{ij} x'^{i+j-2}`.
pub fn deg1_check(ctx: &SigmaContext, divisor_u: &[Point], v1: Point) -> Result<IdentityCheck> {
    let u = sum_u(ctx, divisor_u)?;
    let v = sum_u(ctx, &[v1])?;
    let v2: Vec<C64> = v.iter().map(|z| z * 2.0).collect();
    let lhs = two_point_ratio(ctx, &u, &v2)?;
    let rhs = ctx.curve.f12(v1.x)? - wp_form(ctx, &u, v1.x, v1.x)?;
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn deg1_residual(ctx: &SigmaContext, divisor_u: &[Point], v1: Point) -> Result<f64> {
    Ok(deg1_check(ctx, divisor_u, v1)?.residual)
}

/// Both sides of `sigma(u+v) sigma(u-v) / (sigma(u)^2 sigma_sharp(v)^2) = F(x')`
/// for `v = w(v1)` a single point and `F(x) = prod (x - x_i)`.
pub fn deg2_f_check(ctx: &SigmaContext, divisor_u: &[Point], v1: Point) -> Result<IdentityCheck> {
    let u = sum_u(ctx, divisor_u)?;
    let v = sum_u(ctx, &[v1])?;
    let su = ctx.sigma(&u)?;
    let sv = ctx.sigma_sharp(&v)?;
    let lhs = ctx.sigma(&add(&u, &v))? * ctx.sigma(&sub(&u, &v))? / (su * su * sv * sv);
    let rhs: C64 = divisor_u.iter().map(|p| v1.x - p.x).product();
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn deg2_f_check_residual(ctx: &SigmaContext, divisor_u: &[Point], v1: Point) -> Result<f64> {
    Ok(deg2_f_check(ctx, divisor_u, v1)?.residual)
}

/// The same ratio with `sigma_flat(v)` in the denominator, as printed. In
/// genus two `sigma_flat = sigma` vanishes on single-point images, so this
/// is reported as a theta-divisor pole.
pub fn deg2_printed_ratio(ctx: &SigmaContext, divisor_u: &[Point], v1: Point) -> Result<C64> {
    let u = sum_u(ctx, divisor_u)?;
    let v = sum_u(ctx, &[v1])?;
    let (jet, scale) = ctx.sigma_jet_scaled(&[], &v)?;
    if ctx.genus() >= 2 && natural_is_empty(ctx.genus()) && jet[0].norm() < 1e-8 * scale {
        return Err(Error::ThetaDivisorPole(jet[0].norm() / scale));
    }
    two_point_ratio(ctx, &u, &v)
}

fn natural_is_empty(g: usize) -> bool {
    crate::sigma::natural_index_set(g, 2).is_empty()
}
