use thiserror::Error;

/// Errors raised by curve, period, sigma and Toda computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("wrong number of coefficients: expected {expected}, got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("genus must be at least 1")]
    BadGenus,
    #[error("degenerate curve: roots {0} and {1} of f coincide within the separation threshold")]
    DegenerateCurve(usize, usize),
    #[error("root finder did not converge after {0} iterations")]
    RootFindFailure(usize),
    #[error("point lies on a branch point (|f(x)| = {0:e})")]
    BranchPointSingularity(f64),
    #[error("quadrature did not converge (last difference {0:e})")]
    QuadratureNonConvergence(f64),
    #[error("Legendre relation residual {0:e} exceeds certificate tolerance")]
    LegendreCertificateFailure(f64),
    #[error("cycle intersection matrix is not of chain type: {0}")]
    BadIntersection(String),
    #[error("theta series truncation insufficient (tail estimate {0:e})")]
    TruncationInsufficient(f64),
    #[error("no theta characteristic vanishes on the Abel image of the curve")]
    CharacteristicsNotFound,
    #[error("sigma normalization unstable: {0}")]
    NormalizationUnstable(String),
    #[error("argument lies on the theta divisor (|sigma| = {0:e})")]
    ThetaDivisorPole(f64),
    #[error("integration path passes through a branch point")]
    PathThroughBranchPoint,
    #[error("vector is not in the period lattice (distance {0:e})")]
    NotALatticeVector(f64),
    #[error("confluent input: {0}")]
    ConfluentInput(&'static str),
    #[error("limit is indeterminate (denominator cofactor vanishes)")]
    IndeterminateLimit,
    #[error("alpha_{n} has degree {got}, expected {expected}")]
    DegreeMismatch { n: usize, expected: usize, got: usize },
    #[error("point is not {0}-periodic: lattice residual {1:e}")]
    NotTorsion(usize, f64),
    #[error("multiples of the point are not distinct")]
    MultiplesNotDistinct,
    #[error("degenerate conic pair: {0}")]
    DegenerateConicPair(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
