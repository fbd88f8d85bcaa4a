//! Small dense complex linear algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("singular matrix".into()))
}

pub fn solve(m: &CMatrix, b: &CVector) -> Result<CVector> {
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::InvalidInput("singular linear system".into()))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `[[0, -I], [I, 0]]` of size `2g`.
pub fn symplectic_j(g: usize) -> CMatrix {
    let mut j = CMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        j[(i, g + i)] = C64::new(-1.0, 0.0);
        j[(g + i, i)] = C64::new(1.0, 0.0);
    }
    j
}

pub fn to_complex(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
}
