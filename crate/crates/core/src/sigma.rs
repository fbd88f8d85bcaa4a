//! The sigma function, its derivative family, Kleinian zeta and wp
//! functions, and the quasi-periodicity law.

use crate::abel::abel_map;
use crate::curve::{CurvePoint, HyperellipticCurve};
use crate::error::{Error, Result};
use crate::linalg::{inverse, CMatrix};
use crate::periods::{lattice_coords, periods, PeriodData};
use crate::theta::{theta_jet, truncation_radius, Characteristics, ThetaPolicy};
use crate::C64;
use rand::SeedableRng;
use std::f64::consts::PI;

/// Relative size of `theta` against the mass of its series below which the
/// argument is treated as lying on the theta divisor.
pub const DIVISOR_THRESHOLD: f64 = 1e-10;

/// Tail tolerance enforced on every theta evaluation.
pub const TAIL_TOL: f64 = 1e-13;

/// The multi-index `{n+1, n+3, ...}` (1-based, at most `g`); empty for `n >= g`.
pub fn natural_index_set(g: usize, n: usize) -> Vec<usize> {
    assert!(n >= 1, "n must be positive");
    (n + 1..=g).step_by(2).collect()
}

/// Everything needed to evaluate sigma on one curve.
#[derive(Debug, Clone)]
pub struct SigmaContext {
    pub curve: HyperellipticCurve,
    pub periods: PeriodData,
    pub delta: Characteristics,
    pub gamma0: C64,
    pub radius: usize,
    pub tol: f64,
    /// `eta' omega'^{-1}`.
    pub kappa: CMatrix,
    /// `(1/2) omega'^{-1}`.
    pub w: CMatrix,
}

fn unit(g: usize, i: usize) -> Vec<C64> {
    (0..g).map(|j| C64::new(f64::from(u8::from(i == j)), 0.0)).collect()
}

fn matvec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SigmaContext {
    /// Periods, characteristics and normalization with the default policy.
    pub fn new(curve: &HyperellipticCurve) -> Result<Self> {
        let pd = periods(curve)?;
        Self::from_periods(curve, pd, &ThetaPolicy::default())
    }

    pub fn from_periods(curve: &HyperellipticCurve, pd: PeriodData, policy: &ThetaPolicy) -> Result<Self> {
        let radius = truncation_radius(&pd.riemann, policy);
        let delta = riemann_characteristics(curve, &pd, radius)?;
        let mut ctx = Self::unnormalized(curve, pd, delta, radius)?;
        ctx.gamma0 = normalize_gamma0(&ctx)?;
        Ok(ctx)
    }

    /// Context with `gamma0 = 1` and the given characteristics.
    pub fn unnormalized(
        curve: &HyperellipticCurve,
        pd: PeriodData,
        delta: Characteristics,
        radius: usize,
    ) -> Result<Self> {
        let oinv = inverse(&pd.omega1)?;
        let kappa = &pd.eta1 * &oinv;
        let w = oinv * C64::new(0.5, 0.0);
        Ok(SigmaContext {
            curve: curve.clone(),
            periods: pd,
            delta,
            gamma0: C64::new(1.0, 0.0),
            radius,
            tol: TAIL_TOL,
            kappa,
            w,
        })
    }

    pub fn genus(&self) -> usize {
        self.curve.genus()
    }

    /// Same context with the theta truncation radius changed.
    pub fn with_radius(&self, radius: usize) -> Self {
        let mut c = self.clone();
        c.radius = radius;
        c
    }

    /// All mixed directional derivatives of sigma at `u` along subsets of
    /// `dirs`, indexed by bit mask, together with the cancellation scale of
    /// the undifferentiated value.
    pub fn sigma_jet_scaled(&self, dirs: &[Vec<C64>], u: &[C64]) -> Result<(Vec<C64>, f64)> {
        let k = dirs.len();
        let z = matvec(&self.w, u);
        let wdirs: Vec<Vec<C64>> = dirs.iter().map(|d| matvec(&self.w, d)).collect();
        let jet = theta_jet(&self.delta, &z, &self.periods.riemann, &wdirs, self.radius)?;
        if jet.tail > self.tol {
            return Err(Error::TruncationInsufficient(jet.tail));
        }
        let ku = matvec(&self.kappa, u);
        let gauss = self.gamma0 * (-0.5 * dot(u, &ku)).exp();
        // q_d = -d^T kappa u and q_de = -d^T kappa e; P(B) = D_B G / G.
        let q: Vec<C64> = dirs.iter().map(|d| -dot(d, &ku)).collect();
        let kd: Vec<Vec<C64>> = dirs.iter().map(|d| matvec(&self.kappa, d)).collect();
        let qq: Vec<Vec<C64>> = dirs
            .iter()
            .map(|d| kd.iter().map(|ke| -dot(d, ke)).collect())
            .collect();
        let n = 1usize << k;
        let mut p = vec![C64::new(0.0, 0.0); n];
        p[0] = C64::new(1.0, 0.0);
        for mask in 1..n {
            let d = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << d);
            let mut v = q[d] * p[rest];
            let mut r = rest;
            while r != 0 {
                let e = r.trailing_zeros() as usize;
                v += qq[d][e] * p[rest & !(1 << e)];
                r &= r - 1;
            }
            p[mask] = v;
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (mask, o) in out.iter_mut().enumerate() {
            // Leibniz over sub-masks
            let mut sub = mask;
            loop {
                *o += p[sub] * jet.sums[mask & !sub];
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & mask;
            }
            *o *= gauss;
        }
        Ok((out, (gauss.norm() * jet.mass).max(f64::MIN_POSITIVE)))
    }

    pub fn sigma_jet(&self, dirs: &[Vec<C64>], u: &[C64]) -> Result<Vec<C64>> {
        Ok(self.sigma_jet_scaled(dirs, u)?.0)
    }

    pub fn sigma(&self, u: &[C64]) -> Result<C64> {
        Ok(self.sigma_jet(&[], u)?[0])
    }

    /// Derivative of sigma along all of `dirs`.
    pub fn sigma_deriv(&self, dirs: &[Vec<C64>], u: &[C64]) -> Result<C64> {
        Ok(*self.sigma_jet(dirs, u)?.last().unwrap())
    }

    /// `d/du_{i1} ... d/du_{ik} sigma` for 1-based indices.
    pub fn sigma_partial(&self, idx: &[usize], u: &[C64]) -> Result<C64> {
        let g = self.genus();
        let dirs: Vec<Vec<C64>> = idx.iter().map(|&i| unit(g, i - 1)).collect();
        self.sigma_deriv(&dirs, u)
    }

    /// `sigma_{natural^n}`.
    pub fn sigma_natural(&self, n: usize, u: &[C64]) -> Result<C64> {
        self.sigma_partial(&natural_index_set(self.genus(), n), u)
    }

    /// `sigma_sharp = sigma_{natural^1}`.
    pub fn sigma_sharp(&self, u: &[C64]) -> Result<C64> {
        self.sigma_natural(1, u)
    }

    /// `sigma_flat = sigma_{natural^2}`.
    pub fn sigma_flat(&self, u: &[C64]) -> Result<C64> {
        self.sigma_natural(2, u)
    }

    /// Sigma with its gradient and Hessian, erroring on the theta divisor.
    fn second_jet(&self, u: &[C64]) -> Result<(C64, Vec<C64>, CMatrix)> {
        let g = self.genus();
        let mut grad = vec![C64::new(0.0, 0.0); g];
        let mut hess = CMatrix::zeros(g, g);
        let mut s = C64::new(0.0, 0.0);
        for i in 0..g {
            for j in i..g {
                let (jet, scale) = self.sigma_jet_scaled(&[unit(g, i), unit(g, j)], u)?;
                if jet[0].norm() < DIVISOR_THRESHOLD * scale {
                    return Err(Error::ThetaDivisorPole(jet[0].norm() / scale));
                }
                s = jet[0];
                grad[i] = jet[1];
                grad[j] = jet[2];
                hess[(i, j)] = jet[3];
                hess[(j, i)] = jet[3];
            }
        }
        Ok((s, grad, hess))
    }

    /// `zeta_i = d log sigma / du_i`, 1-based.
    pub fn zeta(&self, i: usize, u: &[C64]) -> Result<C64> {
        Ok(self.zeta_vec(u)?[i - 1])
    }

    pub fn zeta_vec(&self, u: &[C64]) -> Result<Vec<C64>> {
        let g = self.genus();
        let dirs: Vec<Vec<C64>> = (0..g).map(|i| unit(g, i)).collect();
        let (jet, scale) = self.sigma_jet_scaled(&dirs, u)?;
        if jet[0].norm() < DIVISOR_THRESHOLD * scale {
            return Err(Error::ThetaDivisorPole(jet[0].norm() / scale));
        }
        Ok((0..g).map(|i| jet[1 << i] / jet[0]).collect())
    }

    /// `wp_{ij} = -d^2 log sigma / du_i du_j`, 1-based.
    pub fn wp(&self, i: usize, j: usize, u: &[C64]) -> Result<C64> {
        Ok(self.wp_matrix(u)?[(i - 1, j - 1)])
    }

    pub fn wp_matrix(&self, u: &[C64]) -> Result<CMatrix> {
        let (s, grad, hess) = self.second_jet(u)?;
        let g = self.genus();
        Ok(CMatrix::from_fn(g, g, |i, j| (grad[i] * grad[j] - s * hess[(i, j)]) / (s * s)))
    }

    /// `chi(l)` and `L(u, l)` for `l = 2 omega' l' + 2 omega'' l''` with
    /// integer `l', l''`.
    pub fn translation_factors_coords(&self, l1: &[f64], l2: &[f64], u: &[C64]) -> (f64, C64) {
        let pd = &self.periods;
        let g = self.genus();
        let mut v = vec![C64::new(0.0, 0.0); g];
        for i in 0..g {
            for j in 0..g {
                v[i] += pd.eta1[(i, j)] * (2.0 * l1[j]) + pd.eta2[(i, j)] * (2.0 * l2[j]);
            }
        }
        let ex: f64 = (0..g)
            .map(|i| l1[i] * self.delta.a[i] - l2[i] * self.delta.b[i] + 0.5 * l1[i] * l2[i])
            .sum();
        let chi = (2.0 * PI * ex).cos().round();
        (chi, dot(u, &v))
    }

    /// `chi(l)` and `L(u, l)`, decomposing `l` over the period lattice.
    pub fn translation_factors(&self, l: &[C64], u: &[C64]) -> Result<(f64, C64)> {
        let (a, b) = lattice_coords(&self.periods, l)?;
        let dev = a.iter().chain(&b).map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
        if dev > 1e-6 {
            return Err(Error::NotALatticeVector(dev));
        }
        let a: Vec<f64> = a.iter().map(|x| x.round()).collect();
        let b: Vec<f64> = b.iter().map(|x| x.round()).collect();
        Ok(self.translation_factors_coords(&a, &b, u))
    }
}

/// Finds the characteristics for which the theta factor of sigma vanishes at
/// Abel images of `g - 1` points (at `u = 0` in genus one).
pub fn riemann_characteristics(curve: &HyperellipticCurve, pd: &PeriodData, radius: usize) -> Result<Characteristics> {
    let g = curve.genus();
    let w = inverse(&pd.omega1)? * C64::new(0.5, 0.0);
    let mut samples: Vec<Vec<C64>> = Vec::new();
    if g == 1 {
        samples.push(vec![C64::new(0.0, 0.0)]);
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5157);
        for _ in 0..3 {
            let pts: Vec<CurvePoint> = (0..g - 1)
                .map(|_| curve.random_point(&mut rng, 1.5 * curve.scale(), 0.2 * curve.scale()).into())
                .collect();
            let u = abel_map(curve, &pts)?.u;
            samples.push(matvec(&w, &u));
        }
    }
    let mut hits = Vec::new();
    for ch in Characteristics::all(g) {
        let mut worst: f64 = 0.0;
        for z in &samples {
            let jet = theta_jet(&ch, z, &pd.riemann, &[], radius)?;
            worst = worst.max(jet.sums[0].norm() / jet.mass);
        }
        if worst < 1e-9 {
            hits.push(ch);
        }
    }
    if hits.len() == 1 {
        Ok(hits.pop().unwrap())
    } else {
        Err(Error::CharacteristicsNotFound)
    }
}

/// `gamma0` making the linear term of sigma at the origin equal to `u_1`,
/// the leading Schur term (`u` in genus one, `u_1 - u_2^3 / 3` in genus two).
pub fn normalize_gamma0(ctx: &SigmaContext) -> Result<C64> {
    let g = ctx.genus();
    if g > 2 {
        return Err(Error::NormalizationUnstable(format!(
            "the Schur leading term has no linear part in genus {g}"
        )));
    }
    let mut c = ctx.clone();
    c.gamma0 = C64::new(1.0, 0.0);
    let d1 = c.sigma_partial(&[1], &vec![C64::new(0.0, 0.0); g])?;
    if d1.norm() < 1e-12 {
        return Err(Error::NormalizationUnstable("vanishing linear term".into()));
    }
    Ok(d1.inv())
}
