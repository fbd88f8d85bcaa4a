//! Sigma-function solutions of the Toda lattice: directional derivatives,
//! the potential `V`, the one- and two-time lattice identities, Flaschka
//! variables, the periodic Lax matrix and its spectral curve.

use crate::addition::{fay_kernel, rel_residual, wp_form};
use crate::curve::Point;
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::poly::ComplexPolynomial;
use crate::sigma::{natural_index_set, SigmaContext, DIVISOR_THRESHOLD};
use crate::C64;

/// How derivatives in the flow parameter are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Deriv {
    /// Termwise theta derivatives.
    Exact,
    /// Plain central difference with the given step.
    Central(f64),
    /// Central differences at `h` and `h/2` combined to fourth order.
    Richardson(f64),
    /// Richardson estimates at `h, h/2, ...` until two successive ones agree
    /// to `1e-10` relative (or stop improving).
    Adaptive(f64),
}

fn adaptive<F: Fn(f64) -> Result<C64>>(est: F, h0: f64) -> Result<C64> {
    let mut h = h0;
    let mut prev = est(h)?;
    let mut best = (f64::INFINITY, prev);
    for _ in 0..10 {
        h /= 2.0;
        let cur = est(h)?;
        let diff = (cur - prev).norm() / cur.norm().max(1e-300);
        if diff < best.0 {
            best = (diff, cur);
        } else if diff > 4.0 * best.0 {
            break;
        }
        if diff < 1e-10 {
            break;
        }
        prev = cur;
    }
    Ok(best.1)
}

/// `((x')^0, ..., (x')^{g-1})`, the coefficient vector of `D`.
pub fn direction(g: usize, xp: C64) -> Vec<C64> {
    let mut d = Vec::with_capacity(g);
    let mut p = C64::new(1.0, 0.0);
    for _ in 0..g {
        d.push(p);
        p *= xp;
    }
    d
}

fn axpy(u: &[C64], s: C64, d: &[C64]) -> Vec<C64> {
    u.iter().zip(d).map(|(a, b)| a + s * b).collect()
}

fn unit(g: usize, i: usize) -> Vec<C64> {
    (0..g).map(|j| C64::new(f64::from(u8::from(i == j)), 0.0)).collect()
}

/// Mixed derivatives of `log sigma` along every subset of `dirs`, by mask
/// (mask 0 holds the principal `log sigma`).
pub fn log_sigma_jet(ctx: &SigmaContext, dirs: &[Vec<C64>], u: &[C64]) -> Result<Vec<C64>> {
    let (jet, scale) = ctx.sigma_jet_scaled(dirs, u)?;
    if jet[0].norm() < DIVISOR_THRESHOLD * scale {
        return Err(Error::ThetaDivisorPole(jet[0].norm() / scale));
    }
    let m: Vec<C64> = jet.iter().map(|s| s / jet[0]).collect();
    let n = m.len();
    let mut k = vec![C64::new(0.0, 0.0); n];
    k[0] = jet[0].ln();
    for mask in 1..n {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut v = m[mask];
        // blocks containing the lowest direction, other than the whole set
        let mut sub = rest;
        loop {
            if sub != rest {
                v -= k[low | sub] * m[rest & !sub];
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        k[mask] = v;
    }
    Ok(k)
}

/// `D^k log sigma(u)` for `k = 0..=order` along `D = sum (x')^{i-1} d/du_i`.
pub fn d_log_sigma(ctx: &SigmaContext, xp: C64, u: &[C64], order: usize) -> Result<Vec<C64>> {
    let d = direction(ctx.genus(), xp);
    let dirs = vec![d; order];
    let jet = log_sigma_jet(ctx, &dirs, u)?;
    Ok((0..=order).map(|k| jet[(1 << k) - 1]).collect())
}

/// Central-difference derivative of order 1 or 2 of `h` along `D`.
pub fn directional_derivative<F>(ctx: &SigmaContext, xp: C64, h: F, u: &[C64], order: usize, step: f64) -> Result<C64>
where
    F: Fn(&[C64]) -> Result<C64>,
{
    let d = direction(ctx.genus(), xp);
    let s = C64::new(step, 0.0);
    let fp = h(&axpy(u, s, &d))?;
    let fm = h(&axpy(u, -s, &d))?;
    match order {
        1 => Ok((fp - fm) / (2.0 * step)),
        2 => Ok((fp - 2.0 * h(u)? + fm) / (step * step)),
        _ => Err(Error::Unsupported("finite-difference order must be 1 or 2")),
    }
}

/// Second derivative of `log g(s)` at `s = 0` from values at `0, +-h`,
/// written through ratios so no branch of the logarithm is crossed.
fn second_log_central<F: Fn(f64) -> Result<C64>>(g: &F, h: f64) -> Result<C64> {
    let g0 = g(0.0)?;
    Ok(((g(h)? / g0).ln() + (g(-h)? / g0).ln()) / (h * h))
}

fn second_log<F: Fn(f64) -> Result<C64>>(g: &F, mode: Deriv) -> Result<C64> {
    match mode {
        Deriv::Central(h) => second_log_central(g, h),
        Deriv::Richardson(h) => {
            let a = second_log_central(g, h)?;
            let b = second_log_central(g, h / 2.0)?;
            Ok((4.0 * b - a) / 3.0)
        }
        Deriv::Adaptive(h) => adaptive(|k| second_log(g, Deriv::Richardson(k)), h),
        Deriv::Exact => Err(Error::Unsupported("exact mode handled by caller")),
    }
}

fn first_central<F: Fn(f64) -> Result<C64>>(g: &F, h: f64) -> Result<C64> {
    Ok((g(h)? - g(-h)?) / (2.0 * h))
}

fn first_deriv<F: Fn(f64) -> Result<C64>>(g: &F, mode: Deriv) -> Result<C64> {
    match mode {
        Deriv::Central(h) => first_central(g, h),
        Deriv::Richardson(h) => {
            let a = first_central(g, h)?;
            let b = first_central(g, h / 2.0)?;
            Ok((4.0 * b - a) / 3.0)
        }
        Deriv::Adaptive(h) => adaptive(|k| first_deriv(g, Deriv::Richardson(k)), h),
        Deriv::Exact => Err(Error::Unsupported("exact mode handled by caller")),
    }
}

/// One-time Toda frame: step `c = 2 w(P')`, offset `t_perp`, flow along
/// `D` with coefficients `(x')^{i-1}`. Sites are `u_n(t) = t_perp + n c + t d`.
#[derive(Debug, Clone)]
pub struct TodaFrame {
    pub ctx: SigmaContext,
    pub base: Point,
    pub v1: Vec<C64>,
    pub c: Vec<C64>,
    pub t_perp: Vec<C64>,
    pub dir: Vec<C64>,
    /// `sigma_flat(c)`.
    pub sigma_c: C64,
    /// `D log sigma_flat` at `c`.
    pub zeta_c: C64,
    /// `f_{1,2}(x')`.
    pub v_c: C64,
    pub period: Option<usize>,
}

impl TodaFrame {
    pub fn new(ctx: &SigmaContext, base: Point, t_perp: Vec<C64>) -> Result<Self> {
        let g = ctx.genus();
        if t_perp.len() != g {
            return Err(Error::BadArity { expected: g, got: t_perp.len() });
        }
        let v1 = crate::abel::abel_point(&ctx.curve, base)?;
        let c: Vec<C64> = v1.iter().map(|z| z * 2.0).collect();
        let dir = direction(g, base.x);
        let mut dirs: Vec<Vec<C64>> = natural_index_set(g, 2).iter().map(|&i| unit(g, i - 1)).collect();
        let nat = (1usize << dirs.len()) - 1;
        dirs.push(dir.clone());
        let (jet, scale) = ctx.sigma_jet_scaled(&dirs, &c)?;
        let sigma_c = jet[nat];
        if sigma_c.norm() < DIVISOR_THRESHOLD * scale {
            return Err(Error::ThetaDivisorPole(sigma_c.norm() / scale));
        }
        let zeta_c = jet[(nat << 1) | 1] / sigma_c;
        let v_c = ctx.curve.f12(base.x)?;
        Ok(Self { ctx: ctx.clone(), base, v1, c, t_perp, dir, sigma_c, zeta_c, v_c, period: None })
    }

    pub fn xp(&self) -> C64 {
        self.base.x
    }

    pub fn genus(&self) -> usize {
        self.ctx.genus()
    }

    pub fn site(&self, n: i64, t: C64) -> Vec<C64> {
        let nc = axpy(&self.t_perp, C64::new(n as f64, 0.0), &self.c);
        axpy(&nc, t, &self.dir)
    }

    /// Splits `u` into a flow parameter along `d` (Hermitian projection)
    /// and the remainder.
    pub fn decompose(&self, u: &[C64]) -> (C64, Vec<C64>) {
        let dd: f64 = self.dir.iter().map(|z| z.norm_sqr()).sum();
        let t: C64 = self.dir.iter().zip(u).map(|(d, z)| d.conj() * z).sum::<C64>() / dd;
        (t, axpy(u, -t, &self.dir))
    }

    pub fn with_t_perp(&self, t_perp: Vec<C64>) -> Self {
        Self { t_perp, ..self.clone() }
    }

    pub fn with_context(&self, ctx: &SigmaContext) -> Result<Self> {
        let mut f = Self::new(ctx, self.base, self.t_perp.clone())?;
        f.period = self.period;
        Ok(f)
    }

    /// `sum wp_{ij}(u) (x')^{i+j-2}`.
    pub fn v(&self, u: &[C64]) -> Result<C64> {
        wp_form(&self.ctx, u, self.xp(), self.xp())
    }

    pub fn v_c(&self) -> C64 {
        self.v_c
    }

    /// `D^k log sigma` at site `n`, time `t`, for `k = 0..=order`.
    pub fn log_jet(&self, n: i64, t: C64, order: usize) -> Result<Vec<C64>> {
        d_log_sigma(&self.ctx, self.xp(), &self.site(n, t), order)
    }
}

/// `(lhs, rhs)` of `-D^2 log(V(u_n) - V_c) = V(u_{n+1}) - 2 V(u_n) + V(u_{n-1})`.
pub fn toda_sides_1d(frame: &TodaFrame, n: i64, t: C64, mode: Deriv) -> Result<(C64, C64)> {
    let vs: Vec<C64> = (-1..=1)
        .map(|k| Ok(-frame.log_jet(n + k, t, 2)?[2]))
        .collect::<Result<_>>()?;
    let rhs = vs[2] - 2.0 * vs[1] + vs[0];
    let lhs = match mode {
        Deriv::Exact => {
            let l = frame.log_jet(n, t, 4)?;
            let (g0, g1, g2) = (-l[2] - frame.v_c, -l[3], -l[4]);
            -(g2 / g0 - (g1 / g0) * (g1 / g0))
        }
        _ => {
            let g = |s: f64| Ok(frame.v(&frame.site(n, t + s))? - frame.v_c);
            -second_log(&g, mode)?
        }
    };
    Ok((lhs, rhs))
}

pub fn toda_residual_1d(frame: &TodaFrame, n: i64, t: C64, mode: Deriv) -> Result<f64> {
    let (l, r) = toda_sides_1d(frame, n, t, mode)?;
    Ok(rel_residual(l, r))
}

/// Terms of the bilinear form at site `n`: `sigma Dt^2 sigma`, `(Dt sigma)^2`,
/// `sigma^2` and `sigma(u+c) sigma(u-c)`, with `Dt = sigma_flat(c) D`.
fn hirota_terms(frame: &TodaFrame, n: i64, t: C64) -> Result<[C64; 4]> {
    let d = frame.dir.clone();
    let (jet, _) = frame.ctx.sigma_jet_scaled(&[d.clone(), d], &frame.site(n, t))?;
    let sc2 = frame.sigma_c * frame.sigma_c;
    let s = jet[0];
    let plus = frame.ctx.sigma(&frame.site(n + 1, t))?;
    let minus = frame.ctx.sigma(&frame.site(n - 1, t))?;
    Ok([s * jet[3] * sc2, jet[1] * jet[1] * sc2, s * s, plus * minus])
}

fn hirota_normalized(terms: [C64; 4], coeff: C64) -> f64 {
    let vals = [terms[0], -terms[1], coeff * terms[2], -terms[3]];
    let sum: C64 = vals.iter().sum();
    let scale = vals.iter().map(|z| z.norm()).fold(1e-300, f64::max);
    sum.norm() / scale
}

/// `sigma Dt^2 sigma - (Dt sigma)^2 + sigma_flat(c)^2 V_c sigma^2 - sigma(u+c) sigma(u-c)`,
/// normalized by the largest term.
pub fn hirota_residual(frame: &TodaFrame, n: i64, t: C64) -> Result<f64> {
    let terms = hirota_terms(frame, n, t)?;
    Ok(hirota_normalized(terms, frame.sigma_c * frame.sigma_c * frame.v_c))
}

/// The same form with `- V_c sigma^2` in place of `+ sigma_flat(c)^2 V_c sigma^2`.
pub fn hirota_residual_as_printed(frame: &TodaFrame, n: i64, t: C64) -> Result<f64> {
    let terms = hirota_terms(frame, n, t)?;
    Ok(hirota_normalized(terms, -frame.v_c))
}

/// Two-time frame data: `c = w(P_1) + w(P_2)`, sites
/// `u0 + n c + t1 d1 + t2 d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSign {
    /// `V_hat - K` with `K = (f(x1, x2) - 2 y1 y2) / (x1 - x2)^2`.
    Fay,
    /// `V_hat - V_hat_c` with `V_hat_c = (2 y1 y2 - f(x1, x2)) / (x1 - x2)^2`.
    Printed,
}

/// `(lhs, rhs)` of `-D1 D2 log(V_hat(u_n) - k) = V_hat(u_{n+1}) - 2 V_hat(u_n) + V_hat(u_{n-1})`.
#[allow(clippy::too_many_arguments)]
pub fn toda2d_sides(
    ctx: &SigmaContext,
    p1: Point,
    p2: Point,
    u0: &[C64],
    n: i64,
    t1: C64,
    t2: C64,
    sign: KernelSign,
    mode: Deriv,
) -> Result<(C64, C64)> {
    let g = ctx.genus();
    let kern = fay_kernel(&ctx.curve, p1, p2)?;
    let k = match sign {
        KernelSign::Fay => kern,
        KernelSign::Printed => -kern,
    };
    let w1 = crate::abel::abel_point(&ctx.curve, p1)?;
    let w2 = crate::abel::abel_point(&ctx.curve, p2)?;
    let c: Vec<C64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
    let (d1, d2) = (direction(g, p1.x), direction(g, p2.x));
    let site = |m: i64, s1: C64, s2: C64| {
        let a = axpy(u0, C64::new(m as f64, 0.0), &c);
        axpy(&axpy(&a, s1, &d1), s2, &d2)
    };
    let vhat = |u: &[C64]| wp_form(ctx, u, p1.x, p2.x);
    let rhs = vhat(&site(n + 1, t1, t2))? - 2.0 * vhat(&site(n, t1, t2))? + vhat(&site(n - 1, t1, t2))?;
    let lhs = match mode {
        Deriv::Exact => {
            // masks over [d1, d1', d2, d2']
            let jet = log_sigma_jet(ctx, &[d1.clone(), d1.clone(), d2.clone(), d2.clone()], &site(n, t1, t2))?;
            let gv = -jet[0b0101] - k;
            let g1 = -jet[0b0111];
            let g2 = -jet[0b1101];
            let g12 = -jet[0b1111];
            -(g12 / gv - g1 * g2 / (gv * gv))
        }
        Deriv::Central(h) | Deriv::Richardson(h) | Deriv::Adaptive(h) => {
            let mixed = |h: f64| -> Result<C64> {
                let hh = C64::new(h, 0.0);
                let gv = |a: C64, b: C64| Ok::<C64, Error>(vhat(&site(n, t1 + a, t2 + b))? - k);
                let g0 = gv(C64::new(0.0, 0.0), C64::new(0.0, 0.0))?;
                let l = |a: C64, b: C64| Ok::<C64, Error>((gv(a, b)? / g0).ln());
                Ok((l(hh, hh)? - l(hh, -hh)? - l(-hh, hh)? + l(-hh, -hh)?) / (4.0 * h * h))
            };
            let rich = |h: f64| Ok((4.0 * mixed(h / 2.0)? - mixed(h)?) / 3.0);
            let v = match mode {
                Deriv::Central(_) => mixed(h)?,
                Deriv::Richardson(_) => rich(h)?,
                _ => adaptive(rich, h)?,
            };
            -v
        }
    };
    Ok((lhs, rhs))
}

#[allow(clippy::too_many_arguments)]
pub fn toda2d_residual(
    ctx: &SigmaContext,
    p1: Point,
    p2: Point,
    u0: &[C64],
    n: i64,
    t1: C64,
    t2: C64,
    sign: KernelSign,
) -> Result<f64> {
    let (l, r) = toda2d_sides(ctx, p1, p2, u0, n, t1, t2, sign, Deriv::Exact)?;
    Ok(rel_residual(l, r))
}

/// Flaschka variables at site `n` computed along two paths each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flaschka {
    /// `V_c - V(u_n)`.
    pub a_wp: C64,
    /// `sigma(u_{n+1}) sigma(u_{n-1}) / (sigma(u_n)^2 sigma_flat(c)^2)`.
    pub a_sigma: C64,
    /// `zeta(u_n) - zeta(u_{n-1}) - zeta_c`, zeta taken along `D`.
    pub b_zeta: C64,
    /// `D log(sigma(u_n) / sigma(u_{n-1})) - zeta_c` by finite differences.
    pub b_fd: C64,
}

impl Flaschka {
    pub fn a_discrepancy(&self) -> f64 {
        rel_residual(self.a_wp, self.a_sigma)
    }

    pub fn b_discrepancy(&self) -> f64 {
        rel_residual(self.b_zeta, self.b_fd)
    }
}

/// Default flow-parameter step: a small fraction of the real half-period.
pub fn default_step(ctx: &SigmaContext) -> f64 {
    let m = (0..ctx.genus()).map(|i| ctx.periods.omega1[(i, i)].norm()).fold(0.0, f64::max);
    2e-3 * m.max(1e-3)
}

pub fn a_sigma(frame: &TodaFrame, n: i64, t: C64) -> Result<C64> {
    let s = |k: i64| frame.ctx.sigma(&frame.site(k, t));
    let sn = s(n)?;
    Ok(s(n + 1)? * s(n - 1)? / (sn * sn * frame.sigma_c * frame.sigma_c))
}

pub fn b_zeta(frame: &TodaFrame, n: i64, t: C64) -> Result<C64> {
    Ok(frame.log_jet(n, t, 1)?[1] - frame.log_jet(n - 1, t, 1)?[1] - frame.zeta_c)
}

/// `a_n` and `b_n` in the labelling of the Flaschka equations
/// `a_k' = a_k (b_{k+1} - b_k)`, `b_k' = a_k - a_{k-1}`.
pub fn flaschka(frame: &TodaFrame, n: i64, t: C64) -> Result<Flaschka> {
    let a_wp = frame.v_c - frame.v(&frame.site(n, t))?;
    let a_s = a_sigma(frame, n, t)?;
    let b_z = b_zeta(frame, n, t)?;
    let h = default_step(&frame.ctx);
    let ratio = |s: f64| {
        let tt = t + s;
        Ok(frame.ctx.sigma(&frame.site(n, tt))? / frame.ctx.sigma(&frame.site(n - 1, tt))?)
    };
    let r0 = ratio(0.0)?;
    let lr = |s: f64| Ok((ratio(s)? / r0).ln());
    let b_fd = first_deriv(&lr, Deriv::Adaptive(h))? - frame.zeta_c;
    Ok(Flaschka { a_wp, a_sigma: a_s, b_zeta: b_z, b_fd })
}

/// Max over `k` in `window` of the relative residuals of the Flaschka
/// equations, with `a` from the sigma ratio and `b` from zeta.
pub fn flaschka_ode_residual(
    frame: &TodaFrame,
    window: std::ops::RangeInclusive<i64>,
    t: C64,
    mode: Deriv,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in window {
        let a = a_sigma(frame, k, t)?;
        let a_prev = a_sigma(frame, k - 1, t)?;
        let b = b_zeta(frame, k, t)?;
        let b_next = b_zeta(frame, k + 1, t)?;
        let (da, db) = match mode {
            Deriv::Exact => {
                let lk = frame.log_jet(k, t, 3)?;
                let lkm = frame.log_jet(k - 1, t, 2)?;
                (lk[3], lk[2] - lkm[2])
            }
            _ => {
                let fa = |s: f64| a_sigma(frame, k, t + s);
                let fb = |s: f64| b_zeta(frame, k, t + s);
                (first_deriv(&fa, mode)?, first_deriv(&fb, mode)?)
            }
        };
        worst = worst.max(rel_residual(da, a * (b_next - b)));
        worst = worst.max(rel_residual(db, a - a_prev));
    }
    Ok(worst)
}

/// Finite Toda state `(a_1..a_N, b_1..b_N)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TodaState {
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    pub t: C64,
}

impl TodaState {
    pub fn new(a: Vec<C64>, b: Vec<C64>, t: C64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::BadArity { expected: a.len(), got: b.len() });
        }
        if a.len() < 2 {
            return Err(Error::InvalidInput("a Toda state needs N >= 2".into()));
        }
        Ok(Self { a, b, t })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn prod_a(&self) -> C64 {
        self.a.iter().product()
    }
}

/// The window `a_1..a_N`, `b_1..b_N` read off a frame at time `t`.
pub fn state_from_frame(frame: &TodaFrame, n: usize, t: C64) -> Result<TodaState> {
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 1..=n as i64 {
        a.push(a_sigma(frame, k, t)?);
        b.push(b_zeta(frame, k, t)?);
    }
    TodaState::new(a, b, t)
}

/// Periodic tridiagonal Lax matrix. The corner entries carry the sign
/// `(-1)^N` so that `det(L - z) = -(w + prod a / w - P(z))` for every `N`.
pub fn lax_matrix(state: &TodaState, w_hat: C64) -> CMatrix {
    let n = state.len();
    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut l = CMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = state.b[i];
        if i + 1 < n {
            l[(i, i + 1)] += C64::new(1.0, 0.0);
            l[(i + 1, i)] += state.a[i];
        }
    }
    l[(0, n - 1)] += state.a[n - 1] / (s * w_hat);
    l[(n - 1, 0)] += s * w_hat;
    l
}

/// The corners exactly as `a_N / w` (top right) and `w` (bottom left).
pub fn lax_matrix_unsigned(state: &TodaState, w_hat: C64) -> CMatrix {
    let n = state.len();
    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut l = lax_matrix(state, w_hat);
    l[(0, n - 1)] -= state.a[n - 1] / (s * w_hat);
    l[(n - 1, 0)] -= s * w_hat;
    l[(0, n - 1)] += state.a[n - 1] / w_hat;
    l[(n - 1, 0)] += w_hat;
    l
}

/// `det` of the open tridiagonal block on `b[lo..=hi]` minus `z`, as a
/// polynomial in `z`; empty blocks give 1.
pub fn tridiagonal_det(a: &[C64], b: &[C64], lo: usize, hi: usize) -> ComplexPolynomial {
    let one = ComplexPolynomial::one();
    if hi < lo {
        return one;
    }
    let mut prev = one.clone();
    let mut cur = &ComplexPolynomial::new(vec![b[lo], C64::new(-1.0, 0.0)]) * &one;
    for k in lo + 1..=hi {
        let diag = ComplexPolynomial::new(vec![b[k], C64::new(-1.0, 0.0)]);
        let next = &(&diag * &cur) - &prev.scale(a[k - 1]);
        prev = cur;
        cur = next;
    }
    cur
}

/// `P(z)`, the invariants `I_1..I_{N+1}` and the branch points of the
/// spectral curve.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub p: ComplexPolynomial,
    pub invariants: Vec<C64>,
    pub prod_a: C64,
    pub weierstrass_z: Vec<C64>,
}

impl SpectralData {
    /// Genus of `w^2 = P^2 - 4 prod a` from the number of distinct roots.
    pub fn genus(&self) -> usize {
        distinct_count(&self.weierstrass_z, 1e-7) / 2 - 1
    }
}

fn distinct_count(z: &[C64], tol: f64) -> usize {
    let scale = z.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let mut reps: Vec<C64> = Vec::new();
    for &v in z {
        if reps.iter().all(|r| (r - v).norm() > tol * scale) {
            reps.push(v);
        }
    }
    reps.len()
}

/// `P(z) = Delta_{1,N}(z) - a_N Delta_{2,N-1}(z)` with its coefficient
/// invariants and the roots of `P^2 - 4 prod a`.
pub fn char_poly(state: &TodaState) -> Result<SpectralData> {
    let n = state.len();
    let (a, b) = (&state.a, &state.b);
    let full = tridiagonal_det(a, b, 0, n - 1);
    let inner = if n >= 3 { tridiagonal_det(a, b, 1, n - 2) } else { ComplexPolynomial::one() };
    let p = &full - &inner.scale(a[n - 1]);
    let mut invariants = Vec::with_capacity(n + 1);
    for k in 1..=n {
        let s = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
        invariants.push(p.coeff(n - k) * s);
    }
    let prod_a = state.prod_a();
    invariants.push(prod_a);
    let disc = &(&p * &p) - &ComplexPolynomial::constant(prod_a * 4.0);
    let weierstrass_z = disc.roots()?;
    if weierstrass_z.len() != 2 * n {
        return Err(Error::RootFindFailure(0));
    }
    Ok(SpectralData { p, invariants, prod_a, weierstrass_z })
}

/// Largest relative value of `det(L - z) + (w + prod a / w - P(z))` over the
/// given `(z, w)` pairs.
pub fn lax_identity_residual(state: &TodaState, sd: &SpectralData, samples: &[(C64, C64)], signed: bool) -> f64 {
    let n = state.len();
    let mut worst: f64 = 0.0;
    for &(z, w) in samples {
        let mut l = if signed { lax_matrix(state, w) } else { lax_matrix_unsigned(state, w) };
        for i in 0..n {
            l[(i, i)] -= z;
        }
        let lhs = det(&l);
        let rhs = -(w + sd.prod_a / w - sd.p.eval(z));
        worst = worst.max(rel_residual(lhs, rhs));
    }
    worst
}

/// Result of checking `w^2 = P(z)^2 - 4 prod a` with `w = 2 w_hat - P(z)`
/// at points of the spectral curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphismCheck {
    pub residual: f64,
    pub roots: Vec<C64>,
    pub genus: usize,
}

/// Places `(z, w_hat)` on the spectral curve over each `z` and checks the
/// quadratic model.
pub fn spectral_morphism(sd: &SpectralData, zs: &[C64]) -> Result<MorphismCheck> {
    let mut worst: f64 = 0.0;
    for &z in zs {
        let pz = sd.p.eval(z);
        let disc = (pz * pz - sd.prod_a * 4.0).sqrt();
        for w_hat in [(pz + disc) / 2.0, (pz - disc) / 2.0] {
            let on_curve = w_hat * w_hat - pz * w_hat + sd.prod_a;
            let sc = (w_hat * w_hat).norm().max((pz * w_hat).norm()).max(sd.prod_a.norm());
            worst = worst.max(on_curve.norm() / sc.max(1e-300));
            let w = w_hat * 2.0 - pz;
            worst = worst.max(rel_residual(w * w, pz * pz - sd.prod_a * 4.0));
        }
    }
    if sd.weierstrass_z.len() != 2 * sd.p.degree() {
        return Err(Error::RootFindFailure(0));
    }
    Ok(MorphismCheck { residual: worst, roots: sd.weierstrass_z.clone(), genus: sd.genus() })
}

/// Max over invariants and times of `|I_k(t) - I_k(t_0)| / (1 + |I_k(t_0)|)`
/// for the window of length `n` read off `frame`.
pub fn invariant_drift(frame: &TodaFrame, n: usize, ts: &[C64]) -> Result<f64> {
    let mut base: Option<Vec<C64>> = None;
    let mut worst: f64 = 0.0;
    for &t in ts {
        let inv = char_poly(&state_from_frame(frame, n, t)?)?.invariants;
        match &base {
            None => base = Some(inv),
            Some(b0) => {
                for (x, y) in inv.iter().zip(b0) {
                    worst = worst.max((x - y).norm() / (1.0 + y.norm()));
                }
            }
        }
    }
    Ok(worst)
}

/// Max over `n in 0..=2N` of `|a_{n+N} - a_n|` and `|b_{n+N} - b_n|`,
/// each relative to `1 + |a_n|` (resp. `b_n`).
pub fn periodicity_residual(frame: &TodaFrame, period: usize, t: C64) -> Result<f64> {
    let p = period as i64;
    let mut worst: f64 = 0.0;
    for n in 0..=2 * p {
        let (a0, a1) = (a_sigma(frame, n, t)?, a_sigma(frame, n + p, t)?);
        let (b0, b1) = (b_zeta(frame, n, t)?, b_zeta(frame, n + p, t)?);
        worst = worst.max((a1 - a0).norm() / (1.0 + a0.norm()));
        worst = worst.max((b1 - b0).norm() / (1.0 + b0.norm()));
    }
    Ok(worst)
}

/// The closed forms of `I_1` and `I_{N+1}` for a periodic frame, as printed
/// (`N zeta_c`, `sigma_flat(c)^{-2N}`) and with the quasi-periodicity
/// correction from `N c` in the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelianInvariants {
    pub i1_printed: C64,
    pub i_last_printed: C64,
    pub i1: C64,
    pub i_last: C64,
}

pub fn abelian_invariants(frame: &TodaFrame, n: usize) -> Result<AbelianInvariants> {
    let nn = n as f64;
    let l: Vec<C64> = frame.c.iter().map(|z| z * nn).collect();
    let i1_printed = frame.zeta_c * nn;
    let i_last_printed = frame.sigma_c.powi(-2 * n as i32);
    // zeta(u + l) - zeta(u) along d is -L(d, l); the sigma ratios leave exp(-L(c, l)).
    let (_, l_d) = frame.ctx.translation_factors(&l, &frame.dir)?;
    let (_, l_c) = frame.ctx.translation_factors(&l, &frame.c)?;
    Ok(AbelianInvariants { i1_printed, i_last_printed, i1: -l_d - i1_printed, i_last: i_last_printed * (-l_c).exp() })
}
