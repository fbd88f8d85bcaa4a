mod common;

use common::*;
use sigma_toda::poncelet::*;
use sigma_toda::{Error, C64};

fn three_x() -> C64 {
    c((9.0 + 6.0 * 3f64.sqrt()).sqrt() / 3.0)
}

fn four_x() -> C64 {
    c(1.0 + 2f64.sqrt())
}

#[test]
fn constructed_pair_reduces_to_e1() {
    let pair = ConicPair::on_e1(c(0.7)).unwrap();
    let curve = reduce_to_elliptic(&pair).unwrap();
    let want = e1();
    for (a, b) in curve.f_poly().coeffs().iter().zip(want.f_poly().coeffs()) {
        assert!((a - b).norm() < 1e-15);
    }
    assert!((pair.step_abscissa().unwrap() - c(0.7)).norm() < 1e-15);
}

#[test]
fn general_pair_reduction() {
    let a = [c(1.0), c(0.5), c(-2.0), c(1.5), c(0.0), c(0.3), c(0.7), c(-0.2), c(2.0)];
    let pair = ConicPair::new(a).unwrap();
    let curve = reduce_to_elliptic(&pair).unwrap();
    for x in [c(0.3), cx(-1.2, 0.4)] {
        let v = [x, x * x, c(1.0)];
        let mut q = c(0.0);
        for i in 0..3 {
            for j in 0..3 {
                q += v[i] * a[3 * i + j] * v[j];
            }
        }
        assert!(rel(curve.f_poly().eval(x), q / 2.0) < 1e-14);
    }
}

#[test]
fn invalid_pairs() {
    let z = c(0.0);
    let mut a = [c(1.0), c(0.5), c(-2.0), c(1.5), c(1.0), c(0.3), c(0.7), c(-0.2), c(2.0)];
    assert!(matches!(ConicPair::new(a), Err(Error::DegenerateConicPair(_))));
    a[4] = z;
    a[1] = c(0.5);
    a[3] = c(-0.5);
    let pair = ConicPair::new(a).unwrap();
    assert!(matches!(reduce_to_elliptic(&pair), Err(Error::DegenerateConicPair(_))));
    // x^3 - x^2 = x^2 (x - 1): a9 = 0, a3 + a7 = 0, a1 + a6 + a8 = -1
    let pair = ConicPair::new([c(-1.0), c(0.5), c(1.0), c(0.5), z, c(0.5), c(-1.0), c(-0.5), z]).unwrap();
    assert!(matches!(reduce_to_elliptic(&pair), Err(Error::DegenerateConicPair(_))));
    assert!(matches!(ConicPair::new([z; 9]), Err(Error::DegenerateConicPair(_))));
}

#[test]
fn cayley_criterion() {
    for (x, n) in [(three_x(), 3), (four_x(), 4)] {
        let p = Poncelet::new(&ConicPair::on_e1(x).unwrap()).unwrap();
        let hits = p.cayley_closure_check(n).unwrap();
        assert_eq!(hits.len(), 1);
        assert!(p.moduli_roots(n).unwrap().iter().any(|t| (t.point.x - x).norm() < 1e-9));
        // the same pair does not close with a coprime side count
        assert!(p.cayley_closure_check(5).unwrap().is_empty());
    }
    let generic = Poncelet::new(&ConicPair::on_e1(cx(0.41, 0.17)).unwrap()).unwrap();
    for n in 3..=8 {
        assert!(generic.cayley_closure_check(n).unwrap().is_empty());
    }
}

#[test]
fn polygons_close_for_every_start() {
    for (x, n) in [(three_x(), 3), (four_x(), 4)] {
        let p = Poncelet::new(&ConicPair::on_e1(x).unwrap()).unwrap();
        let cand = p.cayley_closure_check(n).unwrap().remove(0);
        for t in [0.13, 0.37, 0.61, 0.89, 1.17] {
            let poly = p.vertices(&cand, n, t).unwrap();
            assert!(poly.closure < 1e-7, "N={n} t={t}: {}", poly.closure);
            assert!(poly.tangency < 1e-6, "N={n} t={t}: {}", poly.tangency);
            assert!(poly.toda < 1e-6, "N={n} t={t}: {}", poly.toda);
            assert_eq!(poly.vertices().len(), n);
            for v in poly.vertices() {
                assert!((v[0] * v[0] - v[1] * v[2]).norm() < 1e-12 * (1.0 + v[1].norm()));
            }
        }
    }
}

#[test]
fn non_torsion_step_does_not_close() {
    let p = Poncelet::new(&ConicPair::on_e1(cx(0.41, 0.17)).unwrap()).unwrap();
    let cand = sigma_toda::division::TorsionCandidate { point: p.step, order_target: 4, residuals: vec![] };
    let poly = p.vertices(&cand, 4, 0.3).unwrap();
    assert!(poly.closure > 1e-3);
    // sides stay tangent: the correspondence is still translation by the step
    assert!(poly.tangency < 1e-6);
}
