use std::fmt;

use thiserror::Error;

/// Structural defect found in a bid or ask vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorDefect {
    /// The entry for zero slots is not zero.
    NonZeroAnchor,
    /// A price is lower than the price for fewer slots.
    Decreasing,
    /// A marginal price is lower than the previous marginal price.
    NonConvex,
    /// A price is NaN or infinite.
    NonFinite,
}

impl fmt::Display for VectorDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VectorDefect::NonZeroAnchor => "non-zero anchor",
            VectorDefect::Decreasing => "decreasing price",
            VectorDefect::NonConvex => "decreasing marginal price",
            VectorDefect::NonFinite => "non-finite price",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AuctionError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("agent {agent}: {defect} at index {index}")]
    InvalidVector {
        agent: usize,
        index: usize,
        defect: VectorDefect,
    },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("unknown agent {0}")]
    UnknownAgent(usize),

    #[error("inconsistent input: {0}")]
    Consistency(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, AuctionError>;
