use core::fmt;

use crate::permanent::Algorithm;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Matrix or phase list is larger than the chosen algorithm accepts.
    DimensionTooLarge {
        what: &'static str,
        dim: usize,
        limit: usize,
    },
    /// Fewer modes than the operation needs.
    DimensionTooSmall {
        what: &'static str,
        dim: usize,
        min: usize,
    },
    /// Two inputs disagree on the number of modes.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite(&'static str),
    OutOfRange {
        what: &'static str,
        value: f64,
    },
    /// Two detectors closer than the angular resolution (indices are 0-based).
    DuplicateDetectors {
        first: usize,
        second: usize,
    },
    /// Two phases coincide, so the detectors could not be physically distinct.
    DuplicatePhases {
        first: usize,
        second: usize,
    },
    /// Some `|Δφ_m|` exceeds `k·d`; `min_kd` is the smallest product that fits.
    Infeasible {
        min_kd: f64,
    },
    UnsupportedInput(&'static str),
    InvalidIndex {
        index: usize,
        n: usize,
    },
    Limit {
        algorithm: Algorithm,
        dim: usize,
        limit: usize,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionTooLarge { what, dim, limit } => {
                write!(f, "{what}: dimension {dim} exceeds limit {limit}")
            }
            Error::DimensionTooSmall { what, dim, min } => {
                write!(f, "{what}: dimension {dim} is below minimum {min}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} modes, found {found}")
            }
            Error::NonFinite(what) => write!(f, "{what} must be finite"),
            Error::OutOfRange { what, value } => write!(f, "{what} out of range: {value}"),
            Error::DuplicateDetectors { first, second } => write!(
                f,
                "detectors {} and {} are at the same angle",
                first + 1,
                second + 1
            ),
            Error::DuplicatePhases { first, second } => write!(
                f,
                "phases {} and {} coincide; detectors must be distinct",
                first + 1,
                second + 1
            ),
            Error::Infeasible { min_kd } => write!(
                f,
                "phases not reachable with this k*d; need k*d >= {min_kd}"
            ),
            Error::UnsupportedInput(what) => write!(f, "unsupported input: {what}"),
            Error::InvalidIndex { index, n } => {
                write!(f, "mode index {} out of range 1..={n}", index + 1)
            }
            Error::Limit {
                algorithm,
                dim,
                limit,
            } => write!(
                f,
                "{} permanent limited to N <= {limit}, got N = {dim}",
                algorithm.name()
            ),
        }
    }
}

impl core::error::Error for Error {}
