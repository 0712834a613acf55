use thiserror::Error;

/// Errors produced by the library.
///
/// The variants are grouped so that front ends can map them onto exit codes:
/// input problems (`Parse`, `InvalidInput`) versus computational failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("singular matrix")]
    Singular,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported prime {0}: only odd primes are handled")]
    UnsupportedPrime(u64),
    #[error("non-convergent parameters: {0}")]
    NonConvergent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
