//! Spectral enclosures for damped second-order systems z̈ + Dż + A₀z = 0.
//!
//! The crate builds finite-dimensional operator pairs (A₀, D), computes the
//! damping constants that parameterize every enclosure region, samples the
//! numerical range and the quadratic numerical range of the associated block
//! operator matrix, and verifies computed eigenvalues against each region.
//!
//! Modules, bottom up:
//! * [`linalg`]: dense complex kernel (Hermitian/general eigensolvers, Cholesky,
//!   matrix square root, Hermitian pencil).
//! * [`model`]: operator pairs (pipe-flow Galerkin compression, diagonal test
//!   model, user matrices) and the energy-coordinate transform.
//! * [`constants`]: damping constants beta, gamma, delta, mu, a0 and the
//!   sectoriality constant k.
//! * [`ranges`]: support-function sampling of the numerical range, root
//!   sampling of the quadratic numerical range.
//! * [`enclosures`]: the bound functions h_i, h_ii, h_iii, h_0 and the region
//!   membership predicates built from them.
//! * [`spectrum`]: quadratic-eigenvalue solve via block linearization plus the
//!   verification harness.
//! * [`cli`]: command front end and file emitters.

// Negated float comparisons like !(x > 0.0) are guards that must treat NaN
// as a failure; rewriting them with the opposite operator would let NaN pass.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod enclosures;
pub mod linalg;
pub mod model;
pub mod ranges;
pub mod spectrum;

use std::fmt;

/// Errors shared by all modules.
#[derive(Debug)]
pub enum Error {
    /// A matrix flagged Hermitian fails the symmetry check.
    NonHermitianInput,
    /// An iterative eigensolver exceeded its sweep cap.
    DidNotConverge(&'static str),
    /// Cholesky or matrix square root hit a nonpositive pivot/eigenvalue.
    NotPositiveDefinite,
    /// A scalar or structural argument is outside the operation's domain.
    InvalidParameter(String),
    /// A vector argument must be nonzero.
    ZeroVector,
    /// The abscissa falls inside the spectral-free interval where the
    /// accretive bound function is undefined.
    InsideGap,
    /// The Hermitian part of a damping matrix has a negative eigenvalue
    /// beyond tolerance.
    NotAccretive(String),
    Io(std::io::Error),
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonHermitianInput => write!(f, "matrix is not Hermitian"),
            Error::DidNotConverge(what) => write!(f, "{} did not converge within the iteration cap", what),
            Error::NotPositiveDefinite => write!(f, "matrix is not positive definite"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {}", msg),
            Error::ZeroVector => write!(f, "vector must be nonzero"),
            Error::InsideGap => write!(f, "abscissa lies inside the spectral-free interval"),
            Error::NotAccretive(msg) => write!(f, "damping matrix is not accretive: {}", msg),
            Error::Io(e) => write!(f, "io error: {}", e),
            Error::Parse(msg) => write!(f, "parse error: {}", msg),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// A nonnegative quantity that may be unbounded.
///
/// Unbounded values are carried explicitly; arithmetic in this crate never
/// produces IEEE infinities silently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    /// Finite value or panic; for contexts where finiteness was already checked.
    pub fn expect_finite(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::Infinite => panic!("expected a finite value"),
        }
    }

    /// self <= y, where an unbounded value exceeds every real.
    pub fn at_most(self, y: f64) -> bool {
        match self {
            Extended::Finite(x) => x <= y,
            Extended::Infinite => false,
        }
    }

    /// self >= y; an unbounded value dominates every real.
    pub fn at_least(self, y: f64) -> bool {
        match self {
            Extended::Finite(x) => x >= y,
            Extended::Infinite => true,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{}", fmt_f64(*x)),
            Extended::Infinite => write!(f, "inf"),
        }
    }
}

/// Decimal float with 17 significant digits, used for every emitted CSV field
/// and for the string-valued floats in JSON outputs.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}
