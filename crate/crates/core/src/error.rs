use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is singular")]
    Singular,
    #[error("not positive definite")]
    NotPositiveDefinite,
    #[error("rank-deficient basis (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("construction does not reproduce the reference basis")]
    ConstructionMismatch,
    #[error("glue stage `{stage}` failed: {detail}")]
    GlueCondition { stage: &'static str, detail: String },
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("inner product {0} outside {{0, ±1, ±2, ±4}}")]
    InnerProductOutOfRange(i64),
    #[error("search failed: {0}")]
    SearchFailed(String),
    #[error("structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("group closure exceeded {0} elements")]
    ClosureCap(usize),
    #[error("fixture checksum mismatch for {0}")]
    FixtureChecksum(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
