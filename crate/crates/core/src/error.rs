use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite coordinate at position {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bound undefined: compression size {m} must be smaller than sample size {n}")]
    CompressionTooLarge { m: usize, n: usize },

    #[error("points agree through the realized depth cap {depth}; distance cannot be resolved")]
    DepthCapExhausted { depth: usize },

    #[error("coordinate {index} requested beyond the realized depth {depth}")]
    CoordinateOutOfRange { index: usize, depth: usize },

    #[error("invalid sequence point: {0}")]
    InvalidPoint(String),

    #[error("empty Voronoi cell at anchor position {0}")]
    EmptyCell(usize),

    #[error("input mismatch: {0}")]
    Mismatch(String),

    #[error("cell does not match any of the four impure shapes: {0}")]
    UnclassifiableCell(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("partition cells overlap: {0}")]
    OverlappingCells(String),

    #[error("malformed input at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
