use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("enumeration refused: {edges} edges exceeds cap {cap}")]
    CapExceeded { edges: usize, cap: usize },
    #[error("no perfect matching (singular Kasteleyn matrix)")]
    NoPerfectMatching,
    #[error("degenerate embedding: {0}")]
    DegenerateEmbedding(String),
    #[error("not a t-embedding: {0}")]
    NotATEmbedding(String),
    #[error("not perfect: {0}")]
    NotPerfect(String),
    #[error("no gauge: {0}")]
    NoGauge(String),
    #[error("inconsistent gauge: closedness residual {0:e}")]
    InconsistentGauge(f64),
    #[error("gauge solve failed, best residual {best:e}")]
    SolveFailed { best: f64 },
    #[error("degenerate gauge: {0}")]
    Degenerate(String),
    #[error("degenerate face: {0}")]
    DegenerateFace(String),
    #[error("degenerate direction alpha: {0}")]
    DegenerateAlpha(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
