use thiserror::Error;

/// Errors raised by map construction, measure algebra and the selection builders.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("value {y} lies outside the branch image [{lo}, {hi}]")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("envelope violated on piece {piece}: {reason}")]
    Envelope { piece: usize, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("distribution function is not invertible at level {0}")]
    NonInvertible(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("invariant density is not unique: fixed space has dimension {dimension}")]
    Ambiguous { dimension: usize, basis: Vec<crate::measures::PiecewiseConstantDensity> },

    #[error("no convergence after {0} iterations")]
    Convergence(usize),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("`{id}` is not available: {note}")]
    Unavailable { id: String, note: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical assertion failed: {0}")]
    Assertion(String),
}

pub type Result<T> = std::result::Result<T, Error>;
