use std::path::PathBuf;

use thiserror::Error;

/// First invariant a genome was found to break.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct GenomeViolation {
    pub message: String,
}

impl GenomeViolation {
    pub fn new(message: impl Into<String>) -> Self {
        Self { message: message.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseGenomeError {
    #[error("malformed token {0:?}")]
    Token(String),
    #[error(transparent)]
    Invalid(#[from] GenomeViolation),
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invariant(String),
}

impl LoadError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        LoadError::Parse { line, message: message.into() }
    }
}

/// Failure to compute an objective value. The offending candidate is
/// discarded by the calling method.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("external evaluator error: {0}")]
    External(String),
    #[error("external evaluator timed out")]
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Error)]
pub enum MethodError {
    #[error("could not evaluate any initial solution: {0}")]
    Init(EvalError),
    #[error("migrant uses {got} encoding, expected {expected}")]
    Encoding { expected: String, got: String },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("island {island}: {source}")]
    Method {
        island: usize,
        #[source]
        source: MethodError,
    },
    #[error("island worker {0} panicked")]
    WorkerPanic(usize),
    #[error("runtime channel closed unexpectedly")]
    Disconnected,
}
