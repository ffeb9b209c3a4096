use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("letter index {letter} is out of range for an alphabet of size {size}")]
    AlphabetMismatch { letter: usize, size: usize },

    #[error("restriction closure exceeded caps ({elements} elements, depth {depth}); partial set: {}", partial.join(", "))]
    Overflow {
        elements: usize,
        depth: usize,
        partial: Vec<String>,
    },

    #[error("element equality undecided: {0}")]
    Undecided(String),

    #[error("no KMS state at r = {r}: r must satisfy 0 < r < 1/{alphabet_size} (there are no KMS states below the critical inverse temperature)")]
    NoKmsState { r: String, alphabet_size: usize },

    #[error("invalid machine: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidMachine(Vec<crate::mealy::Violation>),

    #[error("invalid integer-matrix action: {0}")]
    InvalidMatrixAction(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("invalid document: {0}")]
    Document(String),

    #[error("enumeration budget exceeded: {needed} words requested, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
