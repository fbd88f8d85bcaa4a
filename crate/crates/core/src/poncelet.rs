//! Poncelet polygons inscribed in `C: x^2 = yz` and circumscribed about a
//! conic `D: v A v^T = 0` with `a_5 = 0`.
//!
//! Since `a_5 = 0`, the point at infinity `(0, 1, 0)` of `C` lies on `D`, and
//! `(x, x^2, 1) A (x, x^2, 1)^T / (a_2 + a_4)` is already a monic cubic. Its
//! curve `E_1: w^2 = f(x)` carries the Poncelet correspondence as translation
//! by the point `T` whose abscissa is where the tangent to `D` at `(0, 1, 0)`
//! meets `C` again.

use crate::abel::abel_point;
use crate::curve::{HyperellipticCurve, Point};
use crate::division::{backward_error, cantor_alpha, TorsionCandidate};
use crate::error::{Error, Result};
use crate::linalg::{det, CMatrix};
use crate::sigma::SigmaContext;
use crate::C64;
use serde::Serialize;

/// `A` stored row-major as `a_1..a_9`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConicPair {
    a: [C64; 9],
}

impl ConicPair {
    pub fn new(a: [C64; 9]) -> Result<Self> {
        if a[4] != C64::new(0.0, 0.0) {
            return Err(Error::DegenerateConicPair("a5 must vanish"));
        }
        let pair = ConicPair { a };
        let m = pair.matrix();
        let s = det(&m).norm();
        if !(s > 1e-12 * crate::linalg::max_abs(&m).powi(3)) {
            return Err(Error::DegenerateConicPair("A is singular"));
        }
        Ok(pair)
    }

    /// The pair reducing to `w^2 = x^3 - x` with step abscissa `x_t`.
    pub fn on_e1(x_t: C64) -> Result<Self> {
        let (h, z) = (C64::new(0.5, 0.0), C64::new(0.0, 0.0));
        ConicPair::new([x_t, h, -h, h, z, -x_t * 0.5, -h, -x_t * 0.5, z])
    }

    pub fn entries(&self) -> &[C64; 9] {
        &self.a
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(3, 3, &self.a)
    }

    /// Adjugate of the symmetric part, the matrix of the dual conic up to scale.
    pub fn dual(&self) -> CMatrix {
        let m = self.matrix();
        let s = (&m + m.transpose()) * C64::new(0.5, 0.0);
        let cof = |r: usize, c: usize| {
            let rs: Vec<usize> = (0..3).filter(|&i| i != r).collect();
            let cs: Vec<usize> = (0..3).filter(|&i| i != c).collect();
            let d = s[(rs[0], cs[0])] * s[(rs[1], cs[1])] - s[(rs[0], cs[1])] * s[(rs[1], cs[0])];
            if (r + c) % 2 == 0 {
                d
            } else {
                -d
            }
        };
        CMatrix::from_fn(3, 3, |r, c| cof(c, r))
    }

    fn lead(&self) -> Result<C64> {
        let l = self.a[1] + self.a[3];
        if l.norm() < 1e-14 * self.a.iter().map(|z| z.norm()).fold(0.0, f64::max) {
            return Err(Error::DegenerateConicPair("a2 + a4 vanishes"));
        }
        Ok(l)
    }

    /// Abscissa of the translation point `T` on `E_1`.
    pub fn step_abscissa(&self) -> Result<C64> {
        Ok(-(self.a[5] + self.a[7]) / self.lead()?)
    }

    /// Incidence residual of the chord through the vertices over `s, t` with
    /// the dual conic, normalized so that it is scale-free.
    pub fn tangency_residual(&self, s: C64, t: C64) -> f64 {
        let l = [-(s + t), C64::new(1.0, 0.0), s * t];
        let d = self.dual();
        let mut q = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += l[i] * d[(i, j)] * l[j];
                scale += (l[i] * d[(i, j)] * l[j]).norm();
            }
        }
        q.norm() / scale.max(f64::MIN_POSITIVE)
    }
}

/// `E_1` from the pair: `w^2 = (x, x^2, 1) A (x, x^2, 1)^T / (a_2 + a_4)`.
pub fn reduce_to_elliptic(pair: &ConicPair) -> Result<HyperellipticCurve> {
    let a = pair.entries();
    let lead = pair.lead()?;
    let lambda = vec![a[8] / lead, (a[2] + a[6]) / lead, (a[0] + a[5] + a[7]) / lead];
    HyperellipticCurve::new(1, lambda).map_err(|e| match e {
        Error::DegenerateCurve(..) => Error::DegenerateConicPair("the cubic has a repeated root"),
        other => other,
    })
}

/// The reduced curve with its sigma context and the translation point.
#[derive(Debug, Clone)]
pub struct Poncelet {
    pub pair: ConicPair,
    pub curve: HyperellipticCurve,
    pub ctx: SigmaContext,
    pub step: Point,
}

/// Vertices `x_n = wp((n - 1) u_0 + t)` for `n = 0..=N+1`, where `u_0` is the
/// Abel image of the step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PonceletPolygon {
    pub n: usize,
    pub t: f64,
    pub xs: Vec<C64>,
    /// `|x_{N+1} - x_1| / (1 + |x_1|)`.
    pub closure: f64,
    /// Largest chord/dual-conic incidence residual over the sides.
    pub tangency: f64,
    /// Largest residual of the Toda equation for `log (x_n - x_T)`.
    pub toda: f64,
}

impl PonceletPolygon {
    /// Projective vertices `(x, x^2, 1)` for `n = 1..=N`.
    pub fn vertices(&self) -> Vec<[C64; 3]> {
        self.xs[1..=self.n].iter().map(|&x| [x, x * x, C64::new(1.0, 0.0)]).collect()
    }
}

impl Poncelet {
    pub fn new(pair: &ConicPair) -> Result<Self> {
        let curve = reduce_to_elliptic(pair)?;
        let ctx = SigmaContext::new(&curve)?;
        let step = curve.lift(pair.step_abscissa()?);
        Ok(Poncelet { pair: pair.clone(), curve, ctx, step })
    }

    /// All zeros of `psi_N` on `E_1`, the admissible steps for closure after
    /// `N` sides.
    pub fn moduli_roots(&self, n: usize) -> Result<Vec<TorsionCandidate>> {
        if n < 3 {
            return Err(Error::InvalidInput("a Poncelet polygon has at least three sides".into()));
        }
        let alpha = cantor_alpha(&self.curve, n)?.alpha;
        let mut out = Vec::new();
        for x in alpha.roots()? {
            let p = self.curve.lift(x);
            let r = backward_error(&alpha, x);
            out.push(TorsionCandidate { point: p, order_target: n, residuals: vec![r] });
            if p.y.norm() > 1e-12 {
                out.push(TorsionCandidate { point: p.involution(), order_target: n, residuals: vec![r] });
            }
        }
        Ok(out)
    }

    /// Cayley's criterion: the zeros of `psi_N` that coincide with the step
    /// of this pair. Empty when the polygon does not close after `N` sides.
    pub fn cayley_closure_check(&self, n: usize) -> Result<Vec<TorsionCandidate>> {
        let alpha = cantor_alpha(&self.curve, n)?.alpha;
        let r = backward_error(&alpha, self.step.x);
        if r > 1e-10 {
            return Ok(Vec::new());
        }
        Ok(vec![TorsionCandidate { point: self.step, order_target: n, residuals: vec![r] }])
    }

    /// The polygon through `x_1 = wp(t)`.
    pub fn vertices(&self, cand: &TorsionCandidate, n: usize, t: f64) -> Result<PonceletPolygon> {
        let u0 = abel_point(&self.curve, cand.point)?[0];
        let mut xs = Vec::with_capacity(n + 2);
        for k in 0..=n + 1 {
            let u = u0 * (k as f64 - 1.0) + t;
            xs.push(self.ctx.wp(1, 1, &[u])?);
        }
        let closure = (xs[n + 1] - xs[1]).norm() / (1.0 + xs[1].norm());
        let tangency = (0..=n).map(|k| self.pair.tangency_residual(xs[k], xs[k + 1])).fold(0.0, f64::max);
        let xt = cand.point.x;
        let f = self.curve.f_poly();
        let fp = f.derivative();
        let toda = (1..=n)
            .map(|k| {
                let d = xs[k] - xt;
                let h2 = fp.eval(xs[k]) * 2.0 / d - f.eval(xs[k]) * 4.0 / (d * d);
                let rhs = xs[k + 1] - xs[k] * 2.0 + xs[k - 1];
                (-h2 - rhs).norm() / (1.0 + h2.norm().max(rhs.norm()))
            })
            .fold(0.0, f64::max);
        Ok(PonceletPolygon { n, t, xs, closure, tangency, toda })
    }
}
