use thiserror::Error;

/// Errors surfaced by the analysis and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain (bad ordering,
    /// negative state, query outside a tabulated grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition does not hold (wrong regime, failed
    /// standing assumption, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical routine failed to converge or detected an
    /// inconsistency it cannot recover from.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A resource cap was hit; the partial result is preserved where the
    /// operation documents it.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Invalid configuration or input file.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
