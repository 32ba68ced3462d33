use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across parameter loading, transfer-function evaluation,
/// realisation and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("invalid value for `{field}`: {message}")]
    InvalidValue { field: String, message: String },

    #[error("malformed OCP table `{table}`: {message}")]
    MalformedOcp { table: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("eigenvalue search found {found} of {requested} roots in [{lo:e}, {hi:e}] 1/s")]
    RootBracketing {
        found: usize,
        requested: usize,
        lo: f64,
        hi: f64,
    },

    #[error("integrator residue for output `{0}` did not converge")]
    ResidueDivergence(String),

    #[error("frequency response is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("impulse response has imaginary residue {0:e} relative to its peak")]
    ComplexImpulse(f64),

    #[error("Markov sequence of length {have} is too short for a {rows}x{cols} Hankel pair")]
    ShortSequence { have: usize, rows: usize, cols: usize },

    #[error("requested order {order} exceeds Hankel dimension {dim}")]
    OrderTooLarge { order: usize, dim: usize },

    #[error("order deficiency: sigma_{order} = {sigma:e} is negligible against sigma_1 = {sigma_max:e}; use a smaller order")]
    OrderDeficient {
        order: usize,
        sigma: f64,
        sigma_max: f64,
    },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("setpoint soc={soc}, temp={temp} K: {source}")]
    Setpoint {
        soc: f64,
        temp: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("query soc={soc}, temp={temp} K lies outside the model grid")]
    OutOfHull { soc: f64, temp: f64 },

    #[error("model at soc={soc}, temp={temp} K has no well-conditioned modal form")]
    ModalForm { soc: f64, temp: f64 },

    #[error("non-positive voltage {0} V in power conversion")]
    NonPositiveVoltage(f64),

    #[error("model file {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidValue {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that stem from user input rather than numerics.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::MissingField(_)
            | Error::InvalidValue { .. }
            | Error::MalformedOcp { .. }
            | Error::Config(_)
            | Error::Unsupported(_)
            | Error::ModelFormat { .. } => true,
            Error::Setpoint { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
