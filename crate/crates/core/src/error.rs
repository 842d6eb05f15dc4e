use thiserror::Error;

/// Errors raised by the constant pipeline, the simulator and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// One of the structural assumptions on the jump measure or the drift fails.
    #[error("assumption {assumption} is not satisfied: {detail}")]
    Feasibility { assumption: u8, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn feasibility(assumption: u8, detail: impl Into<String>) -> Self {
        Error::Feasibility {
            assumption,
            detail: detail.into(),
        }
    }

    /// Number of the violated assumption, if this is a feasibility error.
    pub fn assumption(&self) -> Option<u8> {
        match self {
            Error::Feasibility { assumption, .. } => Some(*assumption),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
