//! Half-period matrices by contour integration over a chain of branch cuts,
//! certified by the generalized Legendre relation.

use crate::curve::{HyperellipticCurve, Point};
use crate::error::{Error, Result};
use crate::linalg::{inverse, max_abs, symplectic_j, CMatrix};
use crate::C64;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Agreement required between two successive node doublings.
    pub tol: f64,
    /// Upper bound on the Legendre residual.
    pub certificate_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            initial_nodes: 256,
            max_nodes: 4096,
            tol: 1e-11,
            certificate_tol: 1e-8,
        }
    }
}

/// Coefficient `x^{i-1} / 2y` of the holomorphic form `nu_i`, `i = 1..g`.
pub fn first_kind_diff(curve: &HyperellipticCurve, i: usize, p: Point) -> Result<C64> {
    assert!((1..=curve.genus()).contains(&i), "index out of range");
    if p.y.norm() < 1e-14 {
        return Err(Error::BranchPointSingularity(p.y.norm()));
    }
    Ok(p.x.powu(i as u32 - 1) / (p.y * 2.0))
}

/// Polynomial numerator of the second-kind form `nu^{II}_j`, ascending in `x`.
pub fn second_kind_numerator(curve: &HyperellipticCurve, j: usize) -> Vec<C64> {
    let g = curve.genus();
    assert!((1..=g).contains(&j), "index out of range");
    let mut c = vec![C64::new(0.0, 0.0); 2 * g];
    for k in j..=2 * g - j {
        c[k] = curve.lam(k + 1 + j) * (k + 1 - j) as f64;
    }
    c
}

/// Coefficient of `dx` in `nu^{II}_j`.
pub fn second_kind_diff(curve: &HyperellipticCurve, j: usize, p: Point) -> Result<C64> {
    if p.y.norm() < 1e-14 {
        return Err(Error::BranchPointSingularity(p.y.norm()));
    }
    let num = second_kind_numerator(curve, j);
    let v: C64 = num.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * p.x + c);
    Ok(v / (p.y * 2.0))
}

/// Chain of loops around consecutive branch cuts `[e_k, e_{k+1}]`,
/// `k = 1..2g`, with the branch points sorted lexicographically. Sorting by
/// real part makes the chain an x-monotone polyline, so non-adjacent cuts
/// never meet and adjacent loops intersect exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    pub branch: Vec<C64>,
    pub chain: Vec<(usize, usize)>,
}

pub fn build_cycles(curve: &HyperellipticCurve) -> CycleBasis {
    let branch = curve.branch_points().to_vec();
    let chain = (0..2 * curve.genus()).map(|k| (k, k + 1)).collect();
    CycleBasis { branch, chain }
}

impl CycleBasis {
    /// Absolute intersection numbers of the chain loops as read off the
    /// encoding: 1 for loops sharing a branch point, 0 otherwise.
    pub fn combinatorial_intersections(&self) -> Vec<Vec<i64>> {
        let n = self.chain.len();
        let mut m = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = self.chain[i];
                let (c, d) = self.chain[j];
                if i != j && (a == c || a == d || b == c || b == d) {
                    m[i][j] = 1;
                }
            }
        }
        m
    }

    /// Whether two cuts cross away from their shared endpoints.
    pub fn cuts_cross(&self) -> bool {
        let n = self.chain.len();
        for i in 0..n {
            for j in i + 2..n {
                let (a, b) = self.chain[i];
                let (c, d) = self.chain[j];
                if segments_cross(self.branch[a], self.branch[b], self.branch[c], self.branch[d]) {
                    return true;
                }
            }
        }
        false
    }
}

fn cross(o: C64, a: C64, b: C64) -> f64 {
    (a - o).re * (b - o).im - (a - o).im * (b - o).re
}

fn segments_cross(p1: C64, p2: C64, q1: C64, q2: C64) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Certified period data. `omega1, omega2, eta1, eta2` are the half-period
/// matrices; column `j` of `omega1` is half the `alpha_j` period of
/// `(nu_1, ..., nu_g)`.
#[derive(Debug, Clone)]
pub struct PeriodData {
    pub omega1: CMatrix,
    pub omega2: CMatrix,
    pub eta1: CMatrix,
    pub eta2: CMatrix,
    pub riemann: CMatrix,
    pub legendre_residual: f64,
    /// Largest change of any full period between the last two refinements.
    pub quad_error: f64,
    /// Rows `alpha_1..alpha_g, beta_1..beta_g` in chain-loop coordinates.
    pub symplectic_basis: Vec<Vec<i64>>,
    /// Signed intersection matrix of the chain loops.
    pub chain_intersections: Vec<Vec<i64>>,
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.omega1.nrows()
    }

    /// The stacked matrix `[[omega', omega''], [eta', eta'']]`.
    pub fn big_m(&self) -> CMatrix {
        let g = self.genus();
        let mut m = CMatrix::zeros(2 * g, 2 * g);
        m.view_mut((0, 0), (g, g)).copy_from(&self.omega1);
        m.view_mut((0, g), (g, g)).copy_from(&self.omega2);
        m.view_mut((g, 0), (g, g)).copy_from(&self.eta1);
        m.view_mut((g, g), (g, g)).copy_from(&self.eta2);
        m
    }

    /// The same data with `omega'` replaced, for sensitivity checks.
    pub fn with_omega1(&self, omega1: CMatrix) -> Self {
        let mut p = self.clone();
        p.omega1 = omega1;
        p.legendre_residual = legendre_residual(&p);
        p
    }
}

/// `max |M J M^T - (i pi / 2) J|`.
pub fn legendre_residual(pd: &PeriodData) -> f64 {
    let g = pd.genus();
    let m = pd.big_m();
    let j = symplectic_j(g);
    let lhs = &m * &j * m.transpose();
    let rhs = j * C64::new(0.0, std::f64::consts::FRAC_PI_2);
    max_abs(&(lhs - rhs))
}

/// `int_{e_a}^{e_b} x^k dx / 2y` for `k = 0..kmax`, with `n` Gauss-Chebyshev
/// nodes in `x = m + h cos(theta)`. The square root of the two cut factors
/// is `-i h sin(theta)`; the others are continued multiplicatively from the
/// cut midpoint so that `y` stays on one sheet along the whole cut.
fn segment_moments(branch: &[C64], a: usize, b: usize, kmax: usize, n: usize) -> Vec<C64> {
    let ea = branch[a];
    let eb = branch[b];
    let m = (ea + eb) * 0.5;
    let h = (eb - ea) * 0.5;
    let others: Vec<(C64, C64)> = branch
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != a && *k != b)
        .map(|(_, &e)| (e, (m - e).sqrt()))
        .collect();
    let mut acc = vec![C64::new(0.0, 0.0); kmax + 1];
    let w = std::f64::consts::PI / n as f64;
    for j in 0..n {
        let th = (j as f64 + 0.5) * w;
        let x = m + h * th.cos();
        let mut sg = C64::new(1.0, 0.0);
        for &(e, s) in &others {
            sg *= s * ((x - e) / (m - e)).sqrt();
        }
        let base = C64::new(0.0, 0.5) / sg;
        let mut xp = C64::new(1.0, 0.0);
        for v in acc.iter_mut() {
            *v += base * xp * w;
            xp *= x;
        }
    }
    acc
}

fn converged_moments(
    cb: &CycleBasis,
    kmax: usize,
    quad: &QuadratureConfig,
) -> Result<(Vec<Vec<C64>>, f64)> {
    let mut n = quad.initial_nodes;
    let eval = |n: usize| -> Vec<Vec<C64>> {
        cb.chain
            .iter()
            .map(|&(a, b)| segment_moments(&cb.branch, a, b, kmax, n))
            .collect()
    };
    let mut prev = eval(n);
    loop {
        let next_n = 2 * n;
        if next_n > quad.max_nodes {
            let last = eval(n / 2);
            let diff = max_moment_diff(&prev, &last);
            return Err(Error::QuadratureNonConvergence(diff));
        }
        let next = eval(next_n);
        let scale = next.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
        let diff = max_moment_diff(&prev, &next);
        if diff <= quad.tol * scale {
            return Ok((next, 2.0 * diff));
        }
        prev = next;
        n = next_n;
    }
}

fn max_moment_diff(a: &[Vec<C64>], b: &[Vec<C64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Integer symplectic basis for the alternating form `K`: returns rows
/// `alpha_1..alpha_g, beta_1..beta_g` with `alpha_i K beta_j = delta_ij`.
pub fn symplectic_reduction(k: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = k.len();
    let form = |u: &[i64], v: &[i64]| -> i64 {
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s += u[i] * k[i][j] * v[j];
            }
        }
        s
    };
    let mut rest: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    while !rest.is_empty() {
        let e = rest.remove(0);
        let pos = rest
            .iter()
            .position(|f| form(&e, f).abs() == 1)
            .ok_or_else(|| Error::BadIntersection("no unimodular partner".into()))?;
        let mut f = rest.remove(pos);
        if form(&e, &f) == -1 {
            f.iter_mut().for_each(|c| *c = -*c);
        }
        for v in rest.iter_mut() {
            let ve = form(v, &e);
            let vf = form(v, &f);
            for i in 0..n {
                v[i] = v[i] - vf * e[i] + ve * f[i];
            }
        }
        alphas.push(e);
        betas.push(f);
    }
    alphas.extend(betas);
    Ok(alphas)
}

pub fn compute_periods(
    curve: &HyperellipticCurve,
    cycles: &CycleBasis,
    quad: &QuadratureConfig,
) -> Result<PeriodData> {
    let g = curve.genus();
    let n = 2 * g;
    if cycles.cuts_cross() {
        return Err(Error::BadIntersection("branch cuts cross".into()));
    }
    let (mom, qerr) = converged_moments(cycles, n - 1, quad)?;
    // Full periods: rows nu_1..nu_g then nu^{II}_1..nu^{II}_g, one column
    // per chain loop (twice the cut integral).
    let mut pi = CMatrix::zeros(n, n);
    for (c, m) in mom.iter().enumerate() {
        for i in 0..g {
            pi[(i, c)] = m[i] * 2.0;
        }
        for j in 1..=g {
            let num = second_kind_numerator(curve, j);
            let s: C64 = num.iter().zip(m).map(|(a, b)| a * b).sum();
            pi[(g + j - 1, c)] = s * 2.0;
        }
    }
    // Riemann bilinear relation: Pi K^{-1} Pi^T = 2 pi i J.
    let pinv = inverse(&pi)?;
    let c = symplectic_j(g) * C64::new(0.0, std::f64::consts::TAU);
    let kinv = &pinv * c * pinv.transpose();
    let kf = inverse(&kinv)?;
    let mut k = vec![vec![0i64; n]; n];
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let z = kf[(i, j)];
            let r = z.re.round();
            dev = dev.max((z - C64::new(r, 0.0)).norm());
            k[i][j] = r as i64;
        }
    }
    if dev > 1e-4 {
        return Err(Error::BadIntersection(format!(
            "intersection numbers not integral (deviation {dev:e})"
        )));
    }
    let comb = cycles.combinatorial_intersections();
    for i in 0..n {
        for j in 0..n {
            if k[i][j].abs() != comb[i][j] || k[i][j] != -k[j][i] {
                return Err(Error::BadIntersection(format!(
                    "entry ({i},{j}) is {} but the chain encoding requires |.| = {}",
                    k[i][j], comb[i][j]
                )));
            }
        }
    }
    let basis = symplectic_reduction(&k)?;
    let bt = CMatrix::from_fn(n, n, |i, j| C64::new(basis[j][i] as f64, 0.0));
    let p = &pi * bt * C64::new(0.5, 0.0);
    let omega1 = p.view((0, 0), (g, g)).into_owned();
    let omega2 = p.view((0, g), (g, g)).into_owned();
    let eta1 = p.view((g, 0), (g, g)).into_owned();
    let eta2 = p.view((g, g), (g, g)).into_owned();
    let riemann = inverse(&omega1)? * &omega2;
    let mut pd = PeriodData {
        omega1,
        omega2,
        eta1,
        eta2,
        riemann,
        legendre_residual: 0.0,
        quad_error: qerr,
        symplectic_basis: basis,
        chain_intersections: k,
    };
    pd.legendre_residual = legendre_residual(&pd);
    if pd.legendre_residual > quad.certificate_tol {
        return Err(Error::LegendreCertificateFailure(pd.legendre_residual));
    }
    let asym = max_abs(&(&pd.riemann - pd.riemann.transpose()));
    if asym > 1e-8 {
        return Err(Error::BadIntersection(format!("Riemann matrix not symmetric ({asym:e})")));
    }
    if imag_min_eigenvalue(&pd.riemann) <= 0.0 {
        return Err(Error::BadIntersection("Im of the Riemann matrix is not positive definite".into()));
    }
    Ok(pd)
}

/// Periods with the default quadrature policy.
pub fn periods(curve: &HyperellipticCurve) -> Result<PeriodData> {
    compute_periods(curve, &build_cycles(curve), &QuadratureConfig::default())
}

/// Smallest eigenvalue of the symmetrized imaginary part.
pub fn imag_min_eigenvalue(t: &CMatrix) -> f64 {
    let g = t.nrows();
    let y = DMatrix::from_fn(g, g, |i, j| 0.5 * (t[(i, j)].im + t[(j, i)].im));
    y.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}


/// Real coordinates `(u', u'')` with `u = 2 omega' u' + 2 omega'' u''`.
pub fn lattice_coords(pd: &PeriodData, u: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = pd.genus();
    let mut m = DMatrix::<f64>::zeros(2 * g, 2 * g);
    let mut rhs = nalgebra::DVector::<f64>::zeros(2 * g);
    for i in 0..g {
        for j in 0..g {
            let a = pd.omega1[(i, j)] * 2.0;
            let b = pd.omega2[(i, j)] * 2.0;
            m[(i, j)] = a.re;
            m[(i, g + j)] = b.re;
            m[(g + i, j)] = a.im;
            m[(g + i, g + j)] = b.im;
        }
        rhs[i] = u[i].re;
        rhs[g + i] = u[i].im;
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidInput("degenerate period lattice".into()))?;
    Ok(((0..g).map(|i| sol[i]).collect(), (0..g).map(|i| sol[g + i]).collect()))
}

/// `2 omega' l' + 2 omega'' l''`.
pub fn lattice_vector(pd: &PeriodData, l1: &[f64], l2: &[f64]) -> Vec<C64> {
    let g = pd.genus();
    (0..g)
        .map(|i| {
            (0..g)
                .map(|j| pd.omega1[(i, j)] * (2.0 * l1[j]) + pd.omega2[(i, j)] * (2.0 * l2[j]))
                .sum()
        })
        .collect()
}

/// Representative of `u` modulo the lattice with coordinates in `[-1/2, 1/2)`.
pub fn reduce_mod_lattice(pd: &PeriodData, u: &[C64]) -> Result<Vec<C64>> {
    let (a, b) = lattice_coords(pd, u)?;
    let ra: Vec<f64> = a.iter().map(|x| x.round()).collect();
    let rb: Vec<f64> = b.iter().map(|x| x.round()).collect();
    let l = lattice_vector(pd, &ra, &rb);
    Ok(u.iter().zip(l).map(|(x, y)| x - y).collect())
}

/// Distance from `u` to the nearest lattice point, measured in `C^g`.
pub fn lattice_distance(pd: &PeriodData, u: &[C64]) -> Result<f64> {
    let r = reduce_mod_lattice(pd, u)?;
    Ok(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

#[cfg(test)]
mod lattice_tests {
    use super::*;

    #[test]
    fn lattice_round_trip() {
        let q = HyperellipticCurve::new(
            2,
            vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        )
        .unwrap();
        let pd = periods(&q).unwrap();
        let l = lattice_vector(&pd, &[2.0, -1.0], &[0.0, 3.0]);
        assert!(lattice_distance(&pd, &l).unwrap() < 1e-12);
        let (a, b) = lattice_coords(&pd, &l).unwrap();
        assert!((a[0] - 2.0).abs() < 1e-12 && (b[1] - 3.0).abs() < 1e-12);
        let half = lattice_vector(&pd, &[0.5, 0.0], &[0.0, 0.0]);
        assert!(lattice_distance(&pd, &half).unwrap() > 0.1);
    }
}
