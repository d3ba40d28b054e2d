use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Parameters are individually valid but inconsistent with each other.
    #[error("configuration error: {0}")]
    Config(String),

    /// The summation window `[nt]` is empty.
    #[error("empty window: floor(n*t) = 0 for n = {n}, t = {t}")]
    EmptyWindow { n: u64, t: f64 },

    /// A quantity needed as a divisor or scale vanished.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A requested allocation exceeds the configured cap.
    #[error("capacity exceeded: {requested} elements requested, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    /// A numerical routine failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for errors caused by user input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Config(_) | Error::EmptyWindow { .. } | Error::Degenerate(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
