//! Hyperelliptic sigma functions, their addition formulae, and the exact
//! solutions of the Toda lattice they generate.

pub mod abel;
pub mod acceptance;
pub mod addition;
pub mod curve;
pub mod division;
pub mod error;
pub mod io;
pub mod linalg;
pub mod periods;
pub mod poly;
pub mod poncelet;
pub mod quad;
pub mod sigma;
pub mod theta;
pub mod toda;

pub use curve::{CurvePoint, HyperellipticCurve, Point};
pub use error::{Error, Result};
pub use poly::ComplexPolynomial;

pub type C64 = num_complex::Complex64;
