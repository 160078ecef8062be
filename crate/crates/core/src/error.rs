use thiserror::Error;

/// Errors raised by basis construction, the gPC algebra, the models and the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis is not Haar-type: {0}")]
    InvalidBasis(String),

    #[error("Galerkin matrices do not commute (worst pair residual {worst:e})")]
    NotCommuting { worst: f64 },

    #[error("{quantity} is not admissible: spectrum value {value:e} in stochastic cell {cell}")]
    Admissibility {
        quantity: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("non-finite value {value} at quadrature point xi = {xi}")]
    NonFinite { value: f64, xi: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("solver aborted at t = {time}, cell ({i}, {j}), component {component}: {source}")]
    SolverAbort {
        time: f64,
        i: usize,
        j: usize,
        component: usize,
        source: Box<Error>,
    },

    #[error("time stepping stage {stage} failed: {source}")]
    Stage { stage: usize, source: Box<Error> },

    #[error("config error at line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config error for key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
