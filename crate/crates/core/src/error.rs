use thiserror::Error;

use crate::channel::ValidityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad variable names, overlapping variable sets, out-of-range parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A table, codebook, or alphabet exceeded a size cap.
    #[error("size error: {0}")]
    Size(String),

    /// Sequences or tables whose shapes do not line up.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid scheme distribution:\n{0}")]
    Validation(ValidityReport),

    /// Floating-point results that no amount of rounding noise explains.
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }
}
