use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unsupported architecture: {0}")]
    UnsupportedArchitecture(String),

    #[error("block {block} is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { block: usize, sigma_min: f64 },

    #[error("infeasible scattering state: max deviation {deviation:e} exceeds {tolerance:e}")]
    Infeasible { deviation: f64, tolerance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("power bisection failed: {0}")]
    BisectionFailure(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
