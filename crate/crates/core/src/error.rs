use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("stability: {0}")]
    Stability(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("resolution: {0}")]
    Resolution(String),
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("not composable: {0}")]
    NotComposable(String),
    #[error("embedding rejected: {0}")]
    Embedding(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("morphism certificate {measured:.3e} above tolerance {tolerance:.3e}")]
    Certificate { measured: f64, tolerance: f64 },
    #[error("mode cutoff: {0}")]
    Cutoff(String),
    #[error("combinatorial limit: {0}")]
    Combinatorial(String),
    #[error("extrapolation: {0}")]
    Extrapolation(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
