//! Crate-wide error type.

use std::fmt;

/// Errors produced by instance I/O, encoding, simulation and optimization.
#[derive(Debug)]
pub enum Error {
    /// Input text could not be parsed.
    Parse(String),
    /// An instance, model or solution violates a structural requirement.
    Invalid(String),
    /// An exhaustive routine was asked to exceed its size limit.
    SizeCap {
        what: &'static str,
        limit: usize,
        requested: usize,
    },
    /// Vector or matrix dimensions do not match.
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    /// A configuration value is out of range.
    Config(String),
    /// Degenerate input for which the operation is undefined
    /// (zero spectral width, parallel scan directions, ...).
    Degenerate(String),
    /// The interaction graph is not connected, so no finite depth exists.
    DisconnectedGraph,
    /// A node is missing from or duplicated across tours.
    Coverage(String),
    /// Penalty search could not bracket a feasible value.
    Bracket(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(msg) => write!(f, "parse failure: {msg}"),
            Error::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Error::SizeCap {
                what,
                limit,
                requested,
            } => write!(f, "size cap exceeded for {what}: {requested} > {limit}"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::DisconnectedGraph => write!(f, "interaction graph is disconnected"),
            Error::Coverage(msg) => write!(f, "coverage violation: {msg}"),
            Error::Bracket(msg) => write!(f, "penalty bracket failure: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl Error {
    /// Short machine-parseable tag for CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Invalid(_) => "invalid-input",
            Error::SizeCap { .. } => "size-cap",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::Config(_) => "config",
            Error::Degenerate(_) => "degenerate",
            Error::DisconnectedGraph => "disconnected-graph",
            Error::Coverage(_) => "coverage",
            Error::Bracket(_) => "bracket",
            Error::Io(_) => "io",
        }
    }
}
