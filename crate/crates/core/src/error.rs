use std::fmt;

/// Which side of a matrix a margin belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {what} did not converge after {iterations} iterations")]
    NumericalFailure { what: &'static str, iterations: usize },

    #[error("zero {axis} margin at index {index}")]
    ZeroMargin { axis: Axis, index: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("column `{0}` has zero variance")]
    ConstantColumn(String),

    #[error("partitions share no cases")]
    NoCommonCases,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
