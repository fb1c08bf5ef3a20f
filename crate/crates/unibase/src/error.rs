//! Error type shared across the crate.

use std::fmt;

/// Errors produced by expansion, evaluation, and classification routines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A word operation was applied to an empty word that requires at least
    /// one digit (e.g. increment/decrement of the last digit).
    EmptyWord,
    /// A digit exceeded the alphabet maximum.
    DigitOutOfRange { digit: u64, max: u64 },
    /// Incrementing the last digit would leave the alphabet.
    IncrementOverflow,
    /// Decrementing the last digit would go below zero.
    DecrementUnderflow,
    /// A block failed one of the admissibility comparisons.
    ///
    /// `index` is the 1-based rotation/position at which the comparison
    /// failed and `family` names which requirement broke (0 = final digit
    /// at the alphabet maximum, 1 = lower comparison against the reflected
    /// block, 2 = upper comparison against the incremented block).
    NotAdmissible { index: usize, family: u8 },
    /// A root-finding routine could not bracket a root in the given range.
    NoRoot,
    /// An input value (base, probe point, digit count) was outside the
    /// domain of the requested operation.
    OutOfRange,
    /// A computation hit its precision or depth floor without reaching a
    /// decision; retry with more precision or depth.
    PrecisionExhausted,
    /// A derived object failed one of its own defining checks; the message
    /// names the check and the witness position.
    Certificate(String),
    /// A textual input could not be parsed.
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyWord => write!(f, "operation requires a non-empty word"),
            Error::DigitOutOfRange { digit, max } => {
                write!(f, "digit {digit} exceeds alphabet maximum {max}")
            }
            Error::IncrementOverflow => {
                write!(f, "cannot increment last digit: already at alphabet maximum")
            }
            Error::DecrementUnderflow => {
                write!(f, "cannot decrement last digit: already zero")
            }
            Error::NotAdmissible { index, family } => {
                write!(f, "block is not admissible: comparison family {family} fails at position {index}")
            }
            Error::NoRoot => write!(f, "no root of the digit series in the admissible base range"),
            Error::OutOfRange => write!(f, "input outside the domain of this operation"),
            Error::PrecisionExhausted => {
                write!(f, "precision or depth budget exhausted before a decision was reached")
            }
            Error::Certificate(msg) => write!(f, "internal certificate failed: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
