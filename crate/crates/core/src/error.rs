use thiserror::Error;

use crate::tensor::Index;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A pick position does not address a coordinate of the index it is applied to.
    #[error("pick value {value} out of range for index of length {len}")]
    PickRange { value: usize, len: usize },

    #[error("negative pick value {0}")]
    NegativePick(i64),

    #[error("index {index} is not valid for shape {shape:?}")]
    InvalidIndex { index: Index, shape: Vec<usize> },

    #[error("expected rank {expected}, got rank {actual}")]
    Rank { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Transformed indices fall outside the target shape.
    #[error("provision validation failed: {0}")]
    Validation(String),

    #[error("collision at target index {target}")]
    Collision { target: Index },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn shape_mismatch(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    /// Process exit code for this error class.
    ///
    /// `1` I/O or parse failure, `2` validation or argument error, `3` collision
    /// under the `Error` policy.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Json(_) | Error::Io(_) => 1,
            Error::Collision { .. } => 3,
            _ => 2,
        }
    }
}
