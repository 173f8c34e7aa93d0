use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient (smallest singular value {smallest:e}, largest {largest:e})")]
    RankDeficient { smallest: f64, largest: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis is not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("invalid packing problem: {0}")]
    InvalidProblem(String),

    #[error("random generator produced {draws} rank-deficient draws in a row")]
    ImproperRandomState { draws: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("malformed file: {0}")]
    MalformedFile(String),

    #[error("corrupt basis for subspace {index} (orthonormality deviation {deviation:e})")]
    CorruptBasis { index: usize, deviation: f64 },

    #[error("tensor has no elements")]
    EmptyTensor,

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable identifier used as the machine-readable prefix of CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "RankDeficient",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::InvalidProblem(_) => "InvalidProblem",
            Error::ImproperRandomState { .. } => "ImproperRandomState",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::MalformedFile(_) => "MalformedFile",
            Error::CorruptBasis { .. } => "CorruptBasis",
            Error::EmptyTensor => "EmptyTensor",
            Error::Io(_) => "IoFailure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
