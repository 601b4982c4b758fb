use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Möbius inversion produced a negative interval multiplicity, which can
    /// only happen if the F(i, j) table is not monotone under inclusion.
    #[error("inconsistent F table: interval ({lo},{hi}) has multiplicity {multiplicity}")]
    InconsistentF { lo: usize, hi: usize, multiplicity: i64 },

    #[error("environment has {size} atoms, canonical labeling is capped at {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("not perfectly coordinated: {0}")]
    NotPerfectlyCoordinated(String),

    #[error("uncertainty coefficient undefined: H(X) = 0")]
    UndefinedUncertainty,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("species mapping: {0}")]
    Mapping(String),

    #[error("cutoff {cutoff} Å violates the minimum image convention (half cell width {half_width:.4} Å)")]
    MinimumImage { cutoff: f64, half_width: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
