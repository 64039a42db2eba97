use std::io;

/// Errors raised by agents, environments, solvers and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Mismatched dimensions, unknown kinds, invalid parameters in a setup.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inconsistent input data (logs, files).
    #[error("data error: {0}")]
    Data(String),
    /// A checked property or internal invariant failed.
    #[error("property violation: {0}")]
    Invariant(String),
    /// An exhaustive computation would exceed its configured cap.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use config_err;
pub(crate) use domain_err;
