//! The Abel map `P -> int_infinity^P (nu_1, ..., nu_g)` summed over divisors.

use crate::curve::{CurvePoint, HyperellipticCurve, Point};
use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use crate::C64;
use serde::{Deserialize, Serialize};

const ABEL_TOL: f64 = 1e-14;

/// A point of `C^g`, tagged with the number of finite points of the divisor
/// it came from (the stratum `W_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbelPoint {
    pub u: Vec<C64>,
    pub stratum: usize,
}

impl AbelPoint {
    pub fn zero(g: usize) -> Self {
        AbelPoint { u: vec![C64::new(0.0, 0.0); g], stratum: 0 }
    }
}

/// Sum of single-point Abel images; points at infinity contribute nothing.
pub fn abel_map(curve: &HyperellipticCurve, points: &[CurvePoint]) -> Result<AbelPoint> {
    let g = curve.genus();
    let mut u = vec![C64::new(0.0, 0.0); g];
    let mut stratum = 0;
    for p in points {
        if let CurvePoint::Affine(p) = p {
            let v = abel_point(curve, *p)?;
            for (a, b) in u.iter_mut().zip(v) {
                *a += b;
            }
            stratum += 1;
        }
    }
    Ok(AbelPoint { u, stratum: stratum.min(g) })
}

/// Abel image of a single affine point.
pub fn abel_point(curve: &HyperellipticCurve, p: Point) -> Result<Vec<C64>> {
    let g = curve.genus();
    let scale = curve.scale();
    let rb = 10.0 * scale;
    let dir = if p.x.norm() > 1e-12 { p.x / p.x.norm() } else { C64::new(1.0, 0.0) };
    let xb = dir * rb;
    let tb = xb.sqrt().inv();
    let branch = curve.branch_points().to_vec();

    // Leg from infinity in the local parameter t = x^{-1/2}:
    // nu_i = -t^{2g-2i} dt / sqrt(prod (1 - e_k t^2)), with y = t^{-(2g+1)} sqrt(...).
    let ftilde_sqrt = |t: C64| -> C64 {
        let s = t * t;
        branch.iter().map(|e| (C64::new(1.0, 0.0) - e * s).sqrt()).product()
    };
    let leg0 = {
        let f = |s: f64| -> Vec<C64> {
            let t = tb * s;
            let q = ftilde_sqrt(t);
            (1..=g)
                .map(|i| -t.powu((2 * g - 2 * i) as u32) * tb / q)
                .collect()
        };
        integrate_adaptive(&f, 0.0, 1.0, g, ABEL_TOL)?
    };
    let yb = tb.powi(-(2 * g as i32 + 1)) * ftilde_sqrt(tb);

    let path = plan_path(&branch, xb, p.x, scale)?;
    let mut u = leg0;
    let mut y_start = yb;
    for (k, w) in path.windows(2).enumerate() {
        let last = k + 2 == path.len();
        let (a, b) = (w[0], w[1]);
        let (piece, y_end) = x_segment(&branch, g, a, b, y_start, last)?;
        for (ui, pi) in u.iter_mut().zip(piece) {
            *ui += pi;
        }
        y_start = y_end;
    }
    // The whole path was traced on the sheet through yb; its mirror image
    // under the involution ends at the other sheet.
    if (y_start + p.y).norm() < (y_start - p.y).norm() {
        for ui in u.iter_mut() {
            *ui = -*ui;
        }
    }
    Ok(u)
}

/// Integral of `nu` over the segment from `a` to `b`, and `y` at `b`, with
/// `y` continued from `(a, ya)` factor by factor (valid while no branch point
/// lies on the segment). The final segment is parametrized from its end,
/// `x = b + (a - b) s^2`, which absorbs a square-root singularity at a branch
/// point endpoint; there `x - e` is formed as `(b - e) + (a - b) s^2` so that
/// the vanishing factor is exact.
fn x_segment(
    branch: &[C64],
    g: usize,
    a: C64,
    b: C64,
    ya: C64,
    last: bool,
) -> Result<(Vec<C64>, C64)> {
    let y_at = |xe: &dyn Fn(C64) -> C64| -> C64 {
        branch.iter().fold(ya, |acc, e| acc * (xe(*e) / (a - e)).sqrt())
    };
    let integrand = |x: C64, y: C64, dx: C64| -> Vec<C64> {
        let base = dx / (y * 2.0);
        let mut xp = C64::new(1.0, 0.0);
        (0..g)
            .map(|_| {
                let v = base * xp;
                xp *= x;
                v
            })
            .collect()
    };
    let v = if last {
        // s runs from 1 at a down to 0 at b.
        let f = |s: f64| {
            let d = (a - b) * (s * s);
            let y = y_at(&|e| (b - e) + d);
            integrand(b + d, y, (b - a) * (2.0 * s))
        };
        integrate_adaptive(&f, 0.0, 1.0, g, ABEL_TOL)?
    } else {
        let f = |s: f64| {
            let d = (b - a) * s;
            let y = y_at(&|e| (a - e) + d);
            integrand(a + d, y, b - a)
        };
        integrate_adaptive(&f, 0.0, 1.0, g, ABEL_TOL)?
    };
    let yb = y_at(&|e| b - e);
    Ok((v, yb))
}

fn dist_to_segment(p: C64, a: C64, b: C64) -> (f64, f64) {
    let d = b - a;
    let t = (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    ((a + d * t - p).norm(), t)
}

/// Straight path `start -> end`, with waypoints that steer around branch
/// points lying close to the segment (other than the endpoint itself).
fn plan_path(branch: &[C64], start: C64, end: C64, scale: f64) -> Result<Vec<C64>> {
    let guard = 0.02 * scale;
    let mut path = vec![start, end];
    for _ in 0..8 {
        let mut bad = None;
        'outer: for k in 0..path.len() - 1 {
            let (a, b) = (path[k], path[k + 1]);
            for &e in branch {
                if (e - b).norm() < 1e-12 * scale || (e - a).norm() < 1e-12 * scale {
                    continue;
                }
                let (d, t) = dist_to_segment(e, a, b);
                if d < guard && t > 0.0 && t < 1.0 {
                    bad = Some((k, e, a, b));
                    break 'outer;
                }
            }
        }
        let Some((k, e, a, b)) = bad else {
            return Ok(path);
        };
        let dir = (b - a) / (b - a).norm();
        let normal = dir * C64::new(0.0, 1.0);
        let side = ((a - e) * normal.conj()).re;
        let sign = if side >= 0.0 { 1.0 } else { -1.0 };
        let w = e + normal * (sign * 0.25 * scale);
        path.insert(k + 1, w);
    }
    Err(Error::PathThroughBranchPoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periods::{lattice_distance, periods};
    use rand::SeedableRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn empty_divisor() {
        let e = HyperellipticCurve::new(1, vec![c(0.0), c(-1.0), c(0.0)]).unwrap();
        let a = abel_map(&e, &[]).unwrap();
        assert_eq!(a, AbelPoint::zero(1));
        let a = abel_map(&e, &[CurvePoint::Infinity]).unwrap();
        assert_eq!(a.stratum, 0);
    }

    #[test]
    fn point_plus_involution_is_a_period() {
        let q = HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let pd = periods(&q).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = q.random_point(&mut rng, 2.0, 0.1);
            let a = abel_map(&q, &[p.into(), p.involution().into()]).unwrap();
            assert!(lattice_distance(&pd, &a.u).unwrap() < 1e-10);
            assert_eq!(a.stratum, 2);
        }
    }

    #[test]
    fn branch_points_are_half_periods() {
        let q = HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let pd = periods(&q).unwrap();
        for e in q.branch_points() {
            let u = abel_point(&q, Point::new(*e, c(0.0))).unwrap();
            let twice: Vec<C64> = u.iter().map(|z| z * 2.0).collect();
            assert!(lattice_distance(&pd, &twice).unwrap() < 1e-9);
        }
    }

    #[test]
    fn derivative_is_the_holomorphic_form() {
        let q = HyperellipticCurve::new(2, vec![c(0.3), c(-0.2), c(1.1), c(-0.4), c(0.7)]).unwrap();
        let p = q.lift(C64::new(0.7, 1.3));
        let h = 1e-4;
        let pp = {
            let x = p.x + h;
            let y = q.f(x).sqrt();
            Point::new(x, if (y - p.y).norm() < (y + p.y).norm() { y } else { -y })
        };
        let pm = {
            let x = p.x - h;
            let y = q.f(x).sqrt();
            Point::new(x, if (y - p.y).norm() < (y + p.y).norm() { y } else { -y })
        };
        let up = abel_point(&q, pp).unwrap();
        let um = abel_point(&q, pm).unwrap();
        let pd = periods(&q).unwrap();
        for i in 0..2 {
            let diff: Vec<C64> = up.iter().zip(&um).map(|(a, b)| a - b).collect();
            let red = crate::periods::reduce_mod_lattice(&pd, &diff).unwrap();
            let want = p.x.powu(i as u32) / (p.y * 2.0);
            assert!((red[i] / (2.0 * h) - want).norm() < 1e-6);
        }
    }
}
