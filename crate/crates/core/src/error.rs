use thiserror::Error;

/// Failure to read an expression string.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        Self {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("division by an element that is zero in the field")]
    DivisionByZero,

    #[error("matrix is singular over the function field")]
    Singular,

    #[error("zero test inconclusive: only {finite} of {required} sample points evaluated finitely")]
    Inconclusive { finite: usize, required: usize },

    #[error("expression depends on opaque symbol `{0}`, which has no known derivative")]
    OpaqueSymbol(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is defective: {0}")]
    Defective(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
