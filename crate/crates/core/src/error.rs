use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("preset `{preset}` expects {expected} parameter(s), got {got}")]
    PresetArity {
        preset: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate box: upper corner must exceed lower corner on every axis")]
    DegenerateBox,

    #[error("resolution {0:?} is too small: every axis needs at least 3 nodes")]
    UndersizedResolution([usize; 3]),

    #[error("field does not match the grid ({expected} nodes expected, {got} given)")]
    FieldSize { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("empty mask")]
    EmptyMask,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("infeasible boundary datum: u_star exceeds the obstacle at {count} boundary node(s)")]
    InfeasibleDatum { count: usize },

    #[error("solve did not converge ({iterations} iterations, residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("results live on different grids")]
    GridMismatch,

    #[error("quadrature failed to reach tolerance {tol:e} on [{a}, {b}]")]
    Quadrature { tol: f64, a: f64, b: f64 },

    #[error("config {path}:{line}: {reason}")]
    Config {
        path: String,
        line: usize,
        reason: String,
    },

    #[error("config key `{key}`: {reason}")]
    ConfigValue { key: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

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

pub type Result<T> = std::result::Result<T, Error>;
