use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid norm: {0}")]
    InvalidNorm(String),
    #[error("degenerate polygon: {0}")]
    Degenerate(String),
    #[error("gluing error: {0}")]
    Gluing(String),
    #[error("isometry error: {0}")]
    Isometry(String),
    #[error("norm-compatibility error: {0}")]
    NormCompatibility(String),
    #[error("metric class error: {0}")]
    MetricClass(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("unsupported base: {0}")]
    UnsupportedBase(String),
    #[error("loop hits a ramification point: {0}")]
    RamificationCollision(String),
    #[error("loop collapsed to a point")]
    Collapsed,
    #[error("straightening did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("loop is not transverse to the cut system: {0}")]
    Transversality(String),
    #[error("classification error: {0}")]
    Classification(String),
    #[error("search budget exceeded: {0}")]
    Budget(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
