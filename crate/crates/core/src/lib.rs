//! Exact symbolic engine for degree-truncated formal group laws and the
//! graded ring presentations they induce on classifying spaces.
//!
//! The building blocks are sparse polynomials over graded coefficient
//! generators ([`coeff`]), truncated multivariate power series over those
//! polynomials ([`series`]), formal group law models and their n-series
//! ([`fgl`]), splitting-principle Chern class calculus ([`chern`]), graded
//! presentations with Smith-normal-form component analysis
//! ([`presentations`]), and cell decompositions ([`cellular`]).
//!
//! All arithmetic is exact over arbitrary-precision integers. Values are
//! immutable after construction and every operation is a pure function with
//! deterministic, canonical output.

pub mod cellular;
pub mod chern;
pub mod coeff;
pub mod fgl;
pub mod presentations;
pub mod series;
pub mod snf;

use std::fmt;

pub use coeff::{CoeffGenerator, CoeffMonomial, CoeffPoly, Homogeneity};
pub use fgl::{AxiomReport, FGLKind, FGLModel};
pub use series::{SeriesVar, TruncatedSeries};

/// Crate-wide error type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A generator occurring in a polynomial has no assigned image.
    MissingImage(CoeffGenerator),
    /// A homomorphism image is not homogeneous of the generator's degree.
    DegreeMismatch {
        generator: CoeffGenerator,
        expected: i64,
        found: Homogeneity,
    },
    /// A truncation bound below the minimum usable value.
    BoundTooSmall(u32),
    /// Substitution of a series with nonzero constant term into a variable
    /// position with infinite support.
    NonNilpotentSubstitution(String),
    /// Compositional inversion requires a univariate series with zero
    /// constant term and linear coefficient plus or minus one.
    NotInvertible(String),
    /// An express-in target violates its normalization preconditions.
    InvalidTarget(String),
    /// The input is not invariant under the stated root permutations;
    /// carries the witness transposition.
    NotSymmetric(String, String),
    /// Chern class index outside 0..=rank.
    IndexOutOfRange {
        index: usize,
        rank: usize,
    },
    UnsupportedGroup(String),
    UnsupportedModel(String),
    /// A series the pipeline must eliminate has a nonzero residual at the
    /// current bound.
    PSeriesObstructed(String),
    /// A relation over the integers fails the homogeneity check.
    NonHomogeneousRelation {
        index: usize,
    },
    InvalidParameters(String),
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag for each variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MissingImage(_) => "missing-image",
            Error::DegreeMismatch { .. } => "degree-mismatch",
            Error::BoundTooSmall(_) => "bound-too-small",
            Error::NonNilpotentSubstitution(_) => "non-nilpotent-substitution",
            Error::NotInvertible(_) => "not-invertible",
            Error::InvalidTarget(_) => "invalid-target",
            Error::NotSymmetric(_, _) => "not-symmetric",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::UnsupportedGroup(_) => "unsupported-group",
            Error::UnsupportedModel(_) => "unsupported-model",
            Error::PSeriesObstructed(_) => "p-series-obstructed",
            Error::NonHomogeneousRelation { .. } => "non-homogeneous-relation",
            Error::InvalidParameters(_) => "invalid-parameters",
            Error::Parse(_) => "parse",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MissingImage(g) => write!(f, "no image assigned for generator {g}"),
            Error::DegreeMismatch {
                generator,
                expected,
                found,
            } => write!(
                f,
                "image of {generator} must be homogeneous of degree {expected}, found {found:?}"
            ),
            Error::BoundTooSmall(b) => write!(f, "truncation bound {b} is too small"),
            Error::NonNilpotentSubstitution(v) => write!(
                f,
                "substitution for variable {v} has a nonzero constant term"
            ),
            Error::NotInvertible(why) => write!(f, "series is not invertible: {why}"),
            Error::InvalidTarget(why) => write!(f, "invalid expression target: {why}"),
            Error::NotSymmetric(a, b) => {
                write!(
                    f,
                    "series is not symmetric: swapping {a} and {b} changes it"
                )
            }
            Error::IndexOutOfRange { index, rank } => {
                write!(f, "Chern index {index} out of range for rank {rank}")
            }
            Error::UnsupportedGroup(g) => write!(f, "unsupported group: {g}"),
            Error::UnsupportedModel(m) => write!(f, "unsupported model for this operation: {m}"),
            Error::PSeriesObstructed(ctx) => {
                write!(f, "nonzero residual obstructs elimination: {ctx}")
            }
            Error::NonHomogeneousRelation { index } => {
                write!(f, "relation {index} is not homogeneous")
            }
            Error::InvalidParameters(p) => write!(f, "invalid parameters: {p}"),
            Error::Parse(p) => write!(f, "parse error: {p}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
