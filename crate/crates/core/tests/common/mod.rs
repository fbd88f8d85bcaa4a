#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sigma_toda::{HyperellipticCurve, C64};

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `y^2 = x^3 - x`.
pub fn e1() -> HyperellipticCurve {
    HyperellipticCurve::new(1, vec![c(0.0), c(-1.0), c(0.0)]).unwrap()
}

/// `y^2 = x^5 + 1`.
pub fn q5() -> HyperellipticCurve {
    HyperellipticCurve::new(2, vec![c(1.0), c(0.0), c(0.0), c(0.0), c(0.0)]).unwrap()
}

/// A genus-two curve without symmetries.
pub fn g2_generic() -> HyperellipticCurve {
    HyperellipticCurve::new(2, vec![c(0.3), cx(-0.2, 0.1), c(1.1), c(-0.4), c(0.7)]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-30)
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// Random point of `C^g` with entries in a box of half-width `r`.
pub fn random_u<R: rand::Rng>(rng: &mut R, g: usize, r: f64) -> Vec<C64> {
    (0..g)
        .map(|_| cx(rng.gen_range(-r..r), rng.gen_range(-r..r)))
        .collect()
}

/// `alpha_n` for `y^2 = x^3 + a x + b` from the classical recurrence, with
/// `psi_n = (2y)^{n+1 mod 2} alpha_n`.
pub fn elliptic_psi_oracle(a: f64, b: f64, n: usize) -> sigma_toda::ComplexPolynomial {
    use sigma_toda::ComplexPolynomial as P;
    // (poly, e) stands for (2y)^e poly
    let four_f = P::from_real(&[4.0 * b, 4.0 * a, 0.0, 4.0]);
    let norm = |(p, e): (P, usize)| -> (P, usize) { (&p * &four_f.pow(e / 2), e % 2) };
    let mul = |x: &(P, usize), y: &(P, usize)| (&x.0 * &y.0, x.1 + y.1);
    let mut psi: Vec<(P, usize)> = vec![
        (P::zero(), 0),
        (P::one(), 0),
        (P::one(), 1),
        (P::from_real(&[-a * a, 12.0 * b, 6.0 * a, 0.0, 3.0]), 0),
        (
            P::from_real(&[-8.0 * b * b - a * a * a, -4.0 * a * b, -5.0 * a * a, 20.0 * b, 5.0 * a, 0.0, 1.0]).scale(c(2.0)),
            1,
        ),
    ];
    for m in 5..=n.max(4) {
        let k = m / 2;
        let next = if m % 2 == 1 {
            let t1 = norm(mul(&psi[k + 2], &mul(&psi[k], &mul(&psi[k], &psi[k]))));
            let t2 = norm(mul(&psi[k - 1], &mul(&psi[k + 1], &mul(&psi[k + 1], &psi[k + 1]))));
            assert_eq!(t1.1, t2.1);
            (&t1.0 - &t2.0, t1.1)
        } else {
            let t1 = mul(&psi[k + 2], &mul(&psi[k - 1], &psi[k - 1]));
            let t2 = mul(&psi[k - 2], &mul(&psi[k + 1], &psi[k + 1]));
            let (t1, t2) = (norm(t1), norm(t2));
            assert_eq!(t1.1, t2.1);
            let inner = (&t1.0 - &t2.0, t1.1);
            let whole = mul(&psi[k], &inner);
            // divide by 2y
            if whole.1 >= 1 {
                norm((whole.0, whole.1 - 1))
            } else {
                let (q, r) = whole.0.div_rem(&four_f);
                assert!(r.max_abs_coeff() < 1e-9 * whole.0.max_abs_coeff().max(1.0));
                (q, 1)
            }
        };
        psi.push(next);
    }
    psi[n].0.clone()
}

/// Coefficient-wise distance after leading-coefficient normalization.
pub fn projective_distance(a: &sigma_toda::ComplexPolynomial, b: &sigma_toda::ComplexPolynomial) -> f64 {
    if a.degree() != b.degree() {
        return f64::INFINITY;
    }
    let (am, bm) = (a.monic(), b.monic());
    (&am - &bm).max_abs_coeff() / am.max_abs_coeff().max(1.0)
}
