use std::path::PathBuf;

/// Errors raised by siegelkit operations.
///
/// Every variant names the precondition that was violated, so that the CLI
/// can forward the message unchanged.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is singular (determinant is zero)")]
    SingularMatrix,

    #[error("matrix is not positive definite: pivot {index} is {pivot}, below the threshold {threshold}")]
    NotPositiveDefinite {
        index: usize,
        pivot: String,
        threshold: String,
    },

    #[error("matrix is numerically singular at the working precision: {0}")]
    NearSingular(String),

    #[error("shape error: {0}")]
    ShapeError(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("precision exhausted: {0}; retry at a higher precision")]
    PrecisionExhausted(String),

    #[error("indices i={i}, j={j} do not satisfy i > j with i and j in the same segment")]
    NotSameSegment { i: usize, j: usize },

    #[error("no rational map with |det| = {det} and denominator {denominator} found in {attempts} attempts")]
    RetriesExhausted {
        det: String,
        denominator: String,
        attempts: usize,
    },

    #[error("omega sample {index} does not conjugate into the unipotent radical of the standard Borel (deviation {deviation})")]
    InconsistentOmega { index: usize, deviation: String },

    #[error("Siegel parameters must satisfy u >= 1/2 and t <= sqrt(3)/2 for reduction, got u = {u}, t^2 = {t_sq}")]
    NotFundamental { u: String, t_sq: String },

    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::exactmat::MAX_DIM)]
    DimensionOutOfRange(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
