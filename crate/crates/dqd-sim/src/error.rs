use thiserror::Error;

/// Failure categories. The CLI prints these as one-line
/// `error: <category>: <detail>` messages and exits nonzero.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument value (out of range, wrong shape, empty).
    #[error("parameter: {0}")]
    Parameter(String),

    /// Input violates a mathematical contract (non-Hermitian operator,
    /// trace off, not a density matrix).
    #[error("contract: {0}")]
    Contract(String),

    /// A numerical routine lost too much precision to continue
    /// (eigenvalue below tolerance floor, diverging iteration).
    #[error("numerical: {0}")]
    Numerical(String),

    /// Run configuration file missing, unreadable, or inconsistent.
    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
