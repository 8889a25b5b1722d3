use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Domain(String),

    #[error("degenerate lattice: {0}")]
    Degenerate(String),

    /// A search or enumeration would exceed its configured bound.
    #[error("resource bound exceeded: {0}")]
    Resource(String),

    /// The data do not satisfy one of the counting or discriminant relations.
    #[error("chain inconsistency at {step}: {detail}")]
    Inconsistent { step: String, detail: String },

    #[error("group is not symplectic-admissible: {0}")]
    NotAdmissible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn inconsistent(step: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Inconsistent {
            step: step.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
