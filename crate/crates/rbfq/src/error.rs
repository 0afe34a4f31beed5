use thiserror::Error;

/// Errors shared across the collocation and simulation modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel order: d={d}, k={k} (need d >= 1 and k in 0..=3)")]
    KernelOrder { d: usize, k: usize },

    #[error("kernel smoothness too low for this operation: k={k}, need k >= {need}")]
    KernelSmoothness { k: usize, need: usize },

    #[error("invalid point configuration: {0}")]
    Points(String),

    #[error("support radius delta={0} outside (0, 1]")]
    SupportRadius(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("conjugate gradient did not converge within {max_iter} iterations (residual {residual:.3e})")]
    CgDiverged { max_iter: usize, residual: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quantum simulation failed: {0}")]
    Simulation(String),

    #[error("study configuration invalid: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
