//! Error types shared across the crate.

use num_bigint::BigUint;
use thiserror::Error;

/// Unified error type for all qpool operations.
#[derive(Debug, Error)]
pub enum Error {
    /// The field order is not a prime power.
    #[error("{0} is not a prime power")]
    NonPrimePower(u64),

    /// A stated precondition does not hold; the message names the failed
    /// inequality.
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    /// No error-correction bound is known for these parameters.
    #[error("no bound is known: {0}")]
    UnknownBound(String),

    /// Inverse of the zero field element.
    #[error("division by zero in field arithmetic")]
    DivisionByZero,

    /// Operands live in different ambient spaces or fields.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A row or column rank is outside the valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A column was listed in its own covering set.
    #[error("column {0} appears in its own covering set")]
    SelfCover(u64),

    /// The set of objects is too large to address with 64-bit ranks.
    #[error("enumeration has {count} elements, which exceeds 64-bit indexing")]
    EnumerationOverflow { count: BigUint },

    /// Materializing the matrix would exceed the bit budget.
    #[error("matrix needs {rows} x {cols} = {bits} bits; budget is {budget} bits")]
    ResourceBudgetExceeded {
        rows: BigUint,
        cols: BigUint,
        bits: BigUint,
        budget: u64,
    },

    /// The exhaustive search would exceed the tuple budget.
    #[error("exhaustive search needs {tuples} tuples; budget is {budget}")]
    WorkloadBudgetExceeded { tuples: BigUint, budget: u64 },

    /// More error flips were requested than there are rows.
    #[error("cannot flip {requested} distinct rows: outcome has only {rows}")]
    TooManyFlips { requested: u64, rows: u64 },

    /// The matrix file is structurally invalid.
    #[error("malformed matrix file: {detail}{}", .offset.map(|o| format!(" (at byte {o})")).unwrap_or_default())]
    MalformedFile {
        offset: Option<usize>,
        detail: String,
    },

    /// The matrix file declares an unknown format version.
    #[error("unsupported matrix format {found:?}; expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    /// The matrix file checksum does not match its payload.
    #[error("checksum mismatch: file declares {declared:#010x}, payload hashes to {computed:#010x}")]
    ChecksumMismatch { declared: u32, computed: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a [`Error::HypothesisViolation`] with a formatted message.
    pub fn hypothesis(msg: impl Into<String>) -> Self {
        Error::HypothesisViolation(msg.into())
    }
}
