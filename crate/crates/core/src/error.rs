use thiserror::Error;

/// Errors raised by the solver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("value not representable: {0}")]
    Unrepresentable(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("quadrature did not converge (estimated error {error:.3e}, target {target:.3e})")]
    Quadrature { error: f64, target: f64 },
    #[error("field grid does not cover d = {d:.3e}; refine to level {required_level}")]
    GridCoverage { d: f64, required_level: usize },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
