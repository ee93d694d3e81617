use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulators, analyses and the experiment controller.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock cutoff n_max = {0}; need n_max >= 1")]
    InvalidCutoff(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state invariant breached at step {step} (t = {time}): {detail}")]
    InvariantBreach {
        step: usize,
        time: f64,
        detail: String,
    },

    #[error("integration diverged at step {step} (t = {time}): non-finite state")]
    Divergence { step: usize, time: f64 },

    #[error("corrupted density matrix: eigenvalue {0:e} below tolerance")]
    NegativeEigenvalue(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("time {t} outside signal range [0, {t_end})")]
    TimeOutOfRange { t: f64, t_end: f64 },

    #[error("optimizer did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("pole extraction failed: determinant residual {0:e}")]
    PoleResidual(f64),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown regime `{0}`; valid presets: meanfield, quantum, cumulant")]
    UnknownRegime(String),

    #[error("unknown figure `{0}`")]
    UnknownFigure(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV {path} at line {line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
