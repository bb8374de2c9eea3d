use thiserror::Error;

use crate::lp_geometry::Vector;

pub type Result<T> = std::result::Result<T, Error>;

/// Evidence that a target point lies outside the convex hull of a point set.
///
/// `functional` satisfies `<functional, x - target> >= margin > 0` for every
/// point `x` of the offending set, so the hyperplane it defines separates the
/// target from the hull.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCertificate {
    /// 1-based greedy step at which the violation was detected.
    pub step: usize,
    /// Index of the set in a colorful family; `None` for a single set.
    pub set_index: Option<usize>,
    pub functional: Vector,
    pub margin: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("exponent p = {p} is not uniformly smooth (need 1 < p < inf)")]
    NonSmoothExponent { p: f64 },

    #[error("invalid exponent p = {p} (need p >= 1 or p = inf)")]
    InvalidExponent { p: f64 },

    #[error("non-finite coordinate at position {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("bisection stopped with residual {residual:e} above tolerance {tol:e}")]
    ToleranceNotReached { residual: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("target is outside the convex hull (step {}, margin {:e})", .0.step, .0.margin)]
    MembershipViolated(Box<SeparationCertificate>),

    #[error("convex weights are required")]
    MissingWeights,

    #[error("invalid convex certificate: {0}")]
    InvalidCertificate(String),

    #[error("instance too large for the exhaustive oracle: {points} points, k = {k}")]
    InstanceTooLarge { points: usize, k: usize },

    #[error("required k exceeds 2^62")]
    Overflow,

    #[error("degenerate fit: {usable} usable points, need at least 4")]
    DegenerateFit { usable: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cell p={p}, dim={dim}, n={n}: {source}")]
    Cell {
        p: f64,
        dim: usize,
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn certificate(&self) -> Option<&SeparationCertificate> {
        match self {
            Error::MembershipViolated(cert) => Some(cert),
            Error::Cell { source, .. } => source.certificate(),
            _ => None,
        }
    }
}
