use alloc::string::String;

/// Failure classes shared by every module.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Inputs violate a documented precondition (size mismatch, bad spectrum, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The request would materialize an object beyond the supported size.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Well-formed input that this implementation does not handle.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::Error::InvalidInput(alloc::format!($($arg)*)) };
}
macro_rules! resource {
    ($($arg:tt)*) => { $crate::Error::Resource(alloc::format!($($arg)*)) };
}
macro_rules! unsupported {
    ($($arg:tt)*) => { $crate::Error::Unsupported(alloc::format!($($arg)*)) };
}
pub(crate) use {invalid, resource, unsupported};
