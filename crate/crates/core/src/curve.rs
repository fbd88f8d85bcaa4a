//! Odd-degree hyperelliptic curves `y^2 = f(x)` with monic `f` of degree
//! `2g + 1`, the monomial basis `phi_i` of the affine ring, and the scalar
//! algebraic helpers shared by the addition formulae and the Toda module.

use crate::error::{Error, Result};
use crate::poly::ComplexPolynomial;
use crate::C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Two branch points closer than this are treated as a repeated root.
pub const ROOT_SEPARATION: f64 = 1e-9;

/// An affine point `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: C64,
    pub y: C64,
}

impl Point {
    pub fn new(x: C64, y: C64) -> Self {
        Point { x, y }
    }

    /// The hyperelliptic involution `(x, y) -> (x, -y)`.
    pub fn involution(self) -> Self {
        Point { x: self.x, y: -self.y }
    }
}

/// A point of the complete curve: affine, or the single point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CurvePoint {
    Infinity,
    Affine(Point),
}

impl From<Point> for CurvePoint {
    fn from(p: Point) -> Self {
        CurvePoint::Affine(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperellipticCurve {
    genus: usize,
    /// `lambda_0 .. lambda_{2g}`; the leading `lambda_{2g+1} = 1` is implicit.
    lambda: Vec<C64>,
    f: ComplexPolynomial,
    branch: Vec<C64>,
}

impl HyperellipticCurve {
    /// Builds and validates `y^2 = x^{2g+1} + lambda_{2g} x^{2g} + ... + lambda_0`.
    pub fn new(genus: usize, lambda: Vec<C64>) -> Result<Self> {
        if genus == 0 {
            return Err(Error::BadGenus);
        }
        if lambda.len() != 2 * genus + 1 {
            return Err(Error::BadArity {
                expected: 2 * genus + 1,
                got: lambda.len(),
            });
        }
        let mut coeffs = lambda.clone();
        coeffs.push(C64::new(1.0, 0.0));
        let f = ComplexPolynomial::new(coeffs);
        let branch = f.roots()?;
        for i in 0..branch.len() {
            for j in i + 1..branch.len() {
                if (branch[i] - branch[j]).norm() < ROOT_SEPARATION {
                    return Err(Error::DegenerateCurve(i, j));
                }
            }
        }
        Ok(HyperellipticCurve {
            genus,
            lambda,
            f,
            branch,
        })
    }

    /// Curve with prescribed branch points, `f = prod (x - e_i)`.
    pub fn from_branch_points(roots: &[C64]) -> Result<Self> {
        if roots.len() < 3 || roots.len() % 2 == 0 {
            return Err(Error::BadArity {
                expected: 2 * (roots.len() / 2).max(1) + 1,
                got: roots.len(),
            });
        }
        let f = ComplexPolynomial::from_roots(roots);
        let mut lambda = f.into_coeffs();
        lambda.pop();
        Self::new((roots.len() - 1) / 2, lambda)
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    /// `lambda_k` including the implicit `lambda_{2g+1} = 1` and zero beyond.
    pub fn lam(&self, k: usize) -> C64 {
        if k < self.lambda.len() {
            self.lambda[k]
        } else if k == 2 * self.genus + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    pub fn f_poly(&self) -> &ComplexPolynomial {
        &self.f
    }

    pub fn f(&self, x: C64) -> C64 {
        self.f.eval(x)
    }

    pub fn df(&self, x: C64) -> C64 {
        self.f.derivative().eval(x)
    }

    pub fn d2f(&self, x: C64) -> C64 {
        self.f.derivative().derivative().eval(x)
    }

    /// Roots of `f`, sorted by (real part, imaginary part).
    pub fn branch_points(&self) -> &[C64] {
        &self.branch
    }

    /// Largest branch point modulus, at least 1.
    pub fn scale(&self) -> f64 {
        self.branch.iter().map(|e| e.norm()).fold(1.0, f64::max)
    }

    /// Point above `x` on the principal-square-root sheet.
    pub fn lift(&self, x: C64) -> Point {
        Point::new(x, self.f(x).sqrt())
    }

    pub fn on_curve(&self, p: Point, tol: f64) -> bool {
        let fx = self.f(p.x);
        (p.y * p.y - fx).norm() <= tol * (1.0 + fx.norm())
    }

    /// The basis `phi_i` of the affine ring: `x^i` for `i <= g`, then
    /// alternately pure powers of `x` and `x^k y`.
    pub fn phi(&self, i: usize, p: Point) -> C64 {
        let (xpow, with_y) = self.phi_exponents(i);
        let v = p.x.powu(xpow as u32);
        if with_y {
            v * p.y
        } else {
            v
        }
    }

    /// Exponent of `x` and whether a factor `y` is present in `phi_i`.
    pub fn phi_exponents(&self, i: usize) -> (usize, bool) {
        let g = self.genus;
        if i <= g {
            (i, false)
        } else if (i - g) % 2 == 0 {
            ((i - g) / 2 + g, false)
        } else {
            ((i - g) / 2, true)
        }
    }

    /// Baker's symmetric polynomial
    /// `f(x1, x2) = sum_i (x1 x2)^i (lambda_{2i+1} (x1 + x2) + 2 lambda_{2i})`.
    pub fn baker_f2(&self, x1: C64, x2: C64) -> C64 {
        let p = x1 * x2;
        (0..=self.genus)
            .map(|i| p.powu(i as u32) * (self.lam(2 * i + 1) * (x1 + x2) + self.lam(2 * i) * 2.0))
            .sum()
    }

    /// Half the second derivative of `baker_f2` in its second argument on the
    /// diagonal.
    fn baker_f2_diag_curvature(&self, x: C64) -> C64 {
        (0..=self.genus)
            .map(|i| {
                let i_f = i as f64;
                let mut t = C64::new(0.0, 0.0);
                if i >= 1 {
                    t += self.lam(2 * i + 1) * i_f * i_f * x.powu(2 * i as u32 - 1);
                }
                if i >= 2 {
                    t += self.lam(2 * i) * i_f * (i_f - 1.0) * x.powu(2 * i as u32 - 2);
                }
                t
            })
            .sum()
    }

    /// Confluent limit of the two-point kernel
    /// `(f(x1, x2) - 2 y1 y2) / (x1 - x2)^2` as both points merge at `x`.
    pub fn f12(&self, x: C64) -> Result<C64> {
        let fx = self.f(x);
        if fx.norm() < 1e-12 * self.scale().powi(2 * self.genus as i32 + 1) {
            return Err(Error::BranchPointSingularity(fx.norm()));
        }
        let d1 = self.df(x);
        Ok(d1 * d1 / (fx * 4.0) - self.d2f(x) * 0.5 + self.baker_f2_diag_curvature(x))
    }

    /// Taylor coefficients `y^{[0..=kmax]}` of `y(x0 + h)` on the sheet through
    /// `y0`, from `2 y0 y_k = f_k - sum_{0<j<k} y_j y_{k-j}`.
    pub fn y_jet(&self, x0: C64, y0: C64, kmax: usize) -> Result<Vec<C64>> {
        if y0.norm() < 1e-12 * self.scale().powf(self.genus as f64 + 0.5) {
            return Err(Error::BranchPointSingularity(y0.norm()));
        }
        let fk = self.f_taylor(x0);
        let mut y = vec![y0];
        for k in 1..=kmax {
            let mut s = if k < fk.len() { fk[k] } else { C64::new(0.0, 0.0) };
            for j in 1..k {
                s -= y[j] * y[k - j];
            }
            y.push(s / (y0 * 2.0));
        }
        Ok(y)
    }

    /// Taylor coefficients of `f(x0 + h)` in `h`.
    pub fn f_taylor(&self, x0: C64) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.f.coeffs().len());
        let mut p = self.f.clone();
        let mut fact = 1.0;
        for k in 0..self.f.coeffs().len() {
            if k > 0 {
                fact *= k as f64;
            }
            out.push(p.eval(x0) / fact);
            p = p.derivative();
        }
        out
    }

    /// Uniformly random affine point with `|x| <= radius`, at distance at
    /// least `min_dist` from every branch point, random sheet.
    pub fn random_point<R: Rng>(&self, rng: &mut R, radius: f64, min_dist: f64) -> Point {
        loop {
            let r = radius * rng.gen::<f64>().sqrt();
            let th = rng.gen::<f64>() * std::f64::consts::TAU;
            let x = C64::from_polar(r, th);
            if self.branch.iter().all(|e| (x - e).norm() >= min_dist) {
                let p = self.lift(x);
                return if rng.gen::<bool>() { p } else { p.involution() };
            }
        }
    }
}

/// `prod (x - x_i)` as a monic polynomial.
pub fn f_poly_from_roots(xs: &[C64]) -> ComplexPolynomial {
    ComplexPolynomial::from_roots(xs)
}

/// `prod_{i<j} (x_j - x_i)`.
pub fn vandermonde(xs: &[C64]) -> C64 {
    let mut v = C64::new(1.0, 0.0);
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            v *= xs[j] - xs[i];
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::det;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn x3_minus_x() -> HyperellipticCurve {
        HyperellipticCurve::new(1, vec![c(0.0), c(-1.0), c(0.0)]).unwrap()
    }

    #[test]
    fn make_curve_examples() {
        let e = x3_minus_x();
        let bp = e.branch_points();
        for (got, want) in bp.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - c(want)).norm() < 1e-13);
        }
        let q = HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        for z in q.branch_points() {
            assert!((z.powi(5) + c(1.0)).norm() < 1e-12);
        }
        assert!(matches!(
            HyperellipticCurve::new(1, vec![c(0.0); 3]),
            Err(Error::DegenerateCurve(..))
        ));
        assert!(matches!(
            HyperellipticCurve::new(2, vec![c(0.0); 3]),
            Err(Error::BadArity { expected: 5, got: 3 })
        ));
        assert_eq!(HyperellipticCurve::new(0, vec![c(1.0)]), Err(Error::BadGenus));
    }

    #[test]
    fn branch_points_from_factored_form() {
        let eps = 0.25;
        let es = [c(2.0), c(-1.0), c(-1.0 + eps)];
        let e = HyperellipticCurve::from_branch_points(&es).unwrap();
        let got = e.branch_points();
        assert!((got[0] - c(-1.0)).norm() < 1e-13);
        assert!((got[1] - c(-0.75)).norm() < 1e-13);
        assert!((got[2] - c(2.0)).norm() < 1e-13);
        for b in got {
            assert!(e.f(*b).norm() < 1e-12);
        }
    }

    #[test]
    fn phi_case_split() {
        let e = x3_minus_x();
        let p = Point::new(c(2.0), c(7.0));
        assert_eq!(e.phi(2, p), c(7.0));
        assert_eq!(e.phi(1, p), c(2.0));
        assert_eq!(e.phi(3, p), c(4.0));
        let q = HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let p = Point::new(c(3.0), c(5.0));
        assert_eq!(q.phi(3, p), c(5.0));
        assert_eq!(q.phi(4, p), c(27.0));
        assert_eq!(q.phi(5, p), c(15.0));
    }

    #[test]
    fn baker_f2_values() {
        let e = x3_minus_x();
        assert_eq!(e.baker_f2(c(0.0), c(0.0)), c(0.0));
        // hand expansion: lambda_1 (x1 + x2) + 2 lambda_0 + x1 x2 (x1 + x2 + 2 lambda_2)
        let (x1, x2) = (c(1.0), c(2.0));
        let hand = -(x1 + x2) + x1 * x2 * (x1 + x2);
        assert!((e.baker_f2(x1, x2) - hand).norm() < 1e-14);
    }

    #[test]
    fn f12_matches_chord_tangent_doubling() {
        // Independent route: x(2P) from the tangent slope m = f'(x) / 2y,
        // x(2P) = m^2 - lambda_2 - 2x.
        let e = x3_minus_x();
        assert!((e.f12(c(2.0)).unwrap() - c(25.0 / 24.0)).norm() < 1e-14);
        assert!(matches!(e.f12(c(1.0)), Err(Error::BranchPointSingularity(_))));
    }

    #[test]
    fn f12_is_limit_of_two_point_kernel() {
        let q = HyperellipticCurve::new(
            2,
            vec![c(0.3), C64::new(-0.2, 0.1), c(1.1), c(-0.4), c(0.7)],
        )
        .unwrap();
        let p1 = q.lift(C64::new(0.8, 0.6));
        let want = q.f12(p1.x).unwrap();
        let mut prev = f64::MAX;
        for h in [1e-2, 1e-3, 1e-4] {
            let x2 = p1.x + C64::new(h, 0.5 * h);
            let y2 = {
                let y = q.f(x2).sqrt();
                if (y - p1.y).norm() < (y + p1.y).norm() { y } else { -y }
            };
            let k = (q.baker_f2(p1.x, x2) - p1.y * y2 * 2.0) / (p1.x - x2).powi(2);
            let err = (k - want).norm();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn y_jet_squares_to_f() {
        let q = HyperellipticCurve::new(2, vec![c(0.3), c(-0.2), c(1.1), c(-0.4), c(0.7)]).unwrap();
        let p = q.lift(C64::new(0.4, -0.9));
        let y = q.y_jet(p.x, p.y, 8).unwrap();
        let fk = q.f_taylor(p.x);
        for k in 0..=8 {
            let sq: C64 = (0..=k).map(|j| y[j] * y[k - j]).sum();
            let want = if k < fk.len() { fk[k] } else { c(0.0) };
            assert!((sq - want).norm() < 1e-12 * (1.0 + want.norm()));
        }
        assert!((y[1] - q.df(p.x) / (p.y * 2.0)).norm() < 1e-14);
        // closed-form second derivative: y'' = (2 f f'' - f'^2) / (4 f^{3/2})
        let e = x3_minus_x();
        let p = e.lift(c(2.0));
        let y = e.y_jet(p.x, p.y, 2).unwrap();
        let (f, f1, f2) = (e.f(p.x), e.df(p.x), e.d2f(p.x));
        let want = (f * f2 * 2.0 - f1 * f1) / (f * p.y * 4.0) / 2.0;
        assert!((y[2] - want).norm() < 1e-14);
        assert!(matches!(e.y_jet(c(1.0), c(0.0), 2), Err(Error::BranchPointSingularity(_))));
    }

    #[test]
    fn vandermonde_small() {
        assert_eq!(vandermonde(&[c(0.0), c(1.0), c(2.0)]), c(2.0));
        assert_eq!(vandermonde(&[c(3.0), c(1.0), c(3.0)]), c(0.0));
        let p = f_poly_from_roots(&[c(1.0), c(-1.0), c(0.0)]);
        assert_eq!(p, ComplexPolynomial::from_real(&[0.0, -1.0, 0.0, 1.0]));
    }

    #[test]
    fn phi_basis_is_independent() {
        let q = HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 2 * q.genus() + 3;
        let pts: Vec<Point> = (0..n).map(|_| q.random_point(&mut rng, 2.0, 0.1)).collect();
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| q.phi(j, pts[i]));
        assert!(det(&m).norm() > 1e-8);
    }

    proptest! {
        #[test]
        fn baker_f2_diagonal_is_twice_f(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let q = HyperellipticCurve::new(
                2,
                vec![c(0.3), C64::new(-0.2, 0.1), c(1.1), c(-0.4), c(0.7)],
            ).unwrap();
            let x = C64::new(re, im);
            let lhs = q.baker_f2(x, x);
            let rhs = q.f(x) * 2.0;
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
            let y = C64::new(0.5, -im);
            prop_assert!((q.baker_f2(x, y) - q.baker_f2(y, x)).norm() < 1e-10);
        }

        #[test]
        fn vandermonde_matches_power_matrix(xs in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8)) {
            let xs: Vec<C64> = xs.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            let n = xs.len();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| xs[i].powu(j as u32));
            let d = det(&m);
            let v = vandermonde(&xs);
            prop_assert!((d - v).norm() <= 1e-9 * (1.0 + v.norm()));
        }
    }
}
