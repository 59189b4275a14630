//! Error type shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of density evaluation, kernel evaluation and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A density evaluated to a non-positive value, or the density/domain
    /// pairing is invalid (e.g. parabolic density crossing zero inside the
    /// interval).
    NonPositiveDensity { value: f64 },
    /// Requested mode index (n, u) does not exist for this boundary condition.
    UnsupportedIndex { n: usize, u: Option<u8> },
    /// A point lies outside the domain.
    OutOfDomain { coord: f64, limit: f64 },
    /// The resolvent shift must be positive.
    NonPositiveGamma { gamma: f64 },
    /// Operation requires projecting out the zero mode first (NN/PP).
    ZeroModePresent,
    /// Operation is not defined for this boundary condition.
    UnsupportedBoundary { op: &'static str },
    /// Spectral-matrix internal truncation R must be at least the basis size.
    InsufficientTruncation { basis: usize, truncation: usize },
    /// Iterate collapsed: the ansatz has no overlap with the targeted state.
    LostOverlap,
    /// Gram-Schmidt norm of a block member fell below the rank threshold.
    RankCollapse { member: usize },
    /// Sequence too short for a Shanks transformation.
    TooShort { len: usize },
    /// Requested asymptotic model is not in the catalog.
    UnsupportedModel,
    /// Spectral basis cannot resolve the density micro-structure.
    ResolutionTooLow { basis: usize, needed: usize },
    /// Invalid run configuration (CLI / config file).
    Config(String),
    /// I/O failure while writing an output file.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveDensity { value } => {
                write!(f, "density evaluated to non-positive value {value}")
            }
            Error::UnsupportedIndex { n, u } => match u {
                Some(u) => write!(f, "unsupported mode index (n={n}, u={u})"),
                None => write!(f, "unsupported mode index n={n}"),
            },
            Error::OutOfDomain { coord, limit } => {
                write!(f, "coordinate {coord} outside domain (|x| <= {limit})")
            }
            Error::NonPositiveGamma { gamma } => {
                write!(f, "resolvent shift gamma={gamma} must be positive")
            }
            Error::ZeroModePresent => {
                write!(f, "boundary condition has a zero mode; use the regularized kernel")
            }
            Error::UnsupportedBoundary { op } => {
                write!(f, "{op} is not defined for this boundary condition")
            }
            Error::InsufficientTruncation { basis, truncation } => {
                write!(f, "internal truncation {truncation} smaller than basis size {basis}")
            }
            Error::LostOverlap => {
                write!(f, "iterate norm collapsed; ansatz has no overlap with the target")
            }
            Error::RankCollapse { member } => {
                write!(f, "block member {member} became linearly dependent")
            }
            Error::TooShort { len } => {
                write!(f, "sequence of length {len} too short for a Shanks transform")
            }
            Error::UnsupportedModel => write!(f, "asymptotic model not in catalog"),
            Error::ResolutionTooLow { basis, needed } => {
                write!(f, "basis of {basis} modes cannot resolve the density period (need >= {needed})")
            }
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
