use thiserror::Error;

use crate::field::FieldSpec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not a supported prime modulus (must be prime and below 2^61)")]
    InvalidModulus(u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("operands belong to different fields ({0} and {1})")]
    FieldMismatch(FieldSpec, FieldSpec),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size {size} exceeds the configured cap {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("index {index} out of range for bound {bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reconstruction failed at {0}")]
    LayerReconstruction(String),

    #[error("instance refused by oracle caps: {0}")]
    OracleRefused(String),

    #[error("parse error (line {line}): {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
