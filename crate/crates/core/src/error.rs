use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be a power of two and at least 8")]
    InvalidGrid(usize),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("spectrum violates Hermitian symmetry at mode {mode} (defect {defect:e})")]
    MalformedSpectrum { mode: i64, defect: f64 },

    #[error("fields live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },

    #[error("sample count {got} does not match grid size {expected}")]
    SampleCount { expected: usize, got: usize },

    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },

    #[error("field must be strictly positive; sample {index} is {value:e}")]
    Positivity { index: usize, value: f64 },

    #[error("ratio undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("kinetic function is not admissible: f'({witness}) = {derivative:e} <= 0")]
    NonAdmissible { witness: f64, derivative: f64 },

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("solution blew up at t = {t}: norm {norm:e}")]
    BlowUp { t: f64, norm: f64 },

    #[error("empty report")]
    EmptyReport,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Parameter {
        name,
        value,
        reason,
    }
}
