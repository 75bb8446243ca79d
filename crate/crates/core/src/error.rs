use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall in two families: domain errors (a precondition on the
/// inputs was violated, or a search ran out of room) and verification
/// failures (a computed identity did not hold). [`Error::is_verification`]
/// tells them apart.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    InvalidBase(u64),
    #[error("exponent must be at least 1, got {0}")]
    InvalidExponent(u64),
    #[error("input must be a positive integer")]
    Zero,
    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },
    #[error("leading digit must be nonzero")]
    LeadingZero,
    #[error("empty digit sequence")]
    EmptyDigits,
    #[error("no descent bound configured for exponent {0}; supply one explicitly")]
    NoDescentBound(u32),
    #[error("descent bound {bound} rejected: step({witness}) >= {witness}")]
    DescentBoundRejected { bound: u64, witness: u64 },
    #[error("descent bound {0} is too large to tabulate")]
    TableTooLarge(u128),
    #[error("search limit {limit} exceeded without finding height {k}")]
    LimitExceeded { k: u64, limit: String },
    #[error("witness search ceiling {0} exceeded")]
    CeilingExceeded(u64),
    #[error("elements of T are not all congruent modulo {0}; no good-set witness exists")]
    NotCongruent(u64),
    #[error("{0}")]
    Precondition(String),
    #[error("order reduction unavailable: {0}")]
    OrderReductionUnavailable(String),
    #[error("divisibility violated: {0}")]
    DivisibilityViolated(String),
    #[error("value exceeds the digit cap of {cap} digits")]
    ExceedsCap { cap: u64 },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// True for failures of a checked identity, as opposed to bad input.
    pub fn is_verification(&self) -> bool {
        matches!(self, Error::Verification(_) | Error::DivisibilityViolated(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
