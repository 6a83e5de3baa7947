use thiserror::Error;

/// Error categories surfaced by every stage of the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent shapes, grids or cross-references between inputs.
    #[error("configuration error: {0}")]
    Config(String),
    /// A value violates a documented bound or invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// Inputs are valid individually but the formula is undefined for them.
    #[error("domain error: {0}")]
    Domain(String),
    /// Non-finite or runaway numerical result.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Caller asked for something outside the valid index range or call order.
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::Numeric(_) => "numeric",
            Error::Usage(_) => "usage",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::$variant(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure;
