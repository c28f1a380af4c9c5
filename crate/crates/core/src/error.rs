use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-binary value in column `{col}` at row {row}")]
    NonBinaryValue { row: usize, col: String },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("cannot parse numeric value in column `{col}` at row {row}")]
    UnparseableNumeric { row: usize, col: String },
    #[error("non-finite feature value in column `{col}` at row {row}")]
    NonFiniteFeature { row: usize, col: String },
    #[error("score out of [0,1] at row {0}")]
    ScoreOutOfRange(usize),
    #[error("both `score` and `hard` columns present")]
    AmbiguousColumns,
    #[error("sensitive column duplicated by feature column(s): {0:?}")]
    CensoringViolation(Vec<String>),
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("actual labels contain a single class")]
    SingleClassActual,
    #[error("sensitive attribute contains a single group")]
    SingleClassSensitive,
    #[error("empty conditioning cell (s={s}, y={y})")]
    EmptyCell { s: u8, y: u8 },
    #[error("value {0} outside [0,1]")]
    OutOfRange(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),
    #[error("count table sums to zero")]
    ZeroTotal,
    #[error("joint distribution violates equalized odds (gap {0:e})")]
    NotEqOdds(f64),
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) | Error::InvalidConfig(_) => 2,
            Error::NonFiniteLoss { .. } => 4,
            _ => 3,
        }
    }
}
