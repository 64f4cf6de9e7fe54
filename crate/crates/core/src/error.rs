use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("non-numeric feature value {value:?} at row {row}, column {column}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("bad binary dataset: {0}")]
    BadBinary(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class {class} is too small to stratify ({size} samples)")]
    ClassTooSmall { class: usize, size: usize },

    #[error("requested {requested} samples but only {available} are available")]
    NotEnoughSamples { requested: usize, available: usize },

    #[error("empty index set")]
    EmptySet,

    #[error("training diverged (non-finite loss at epoch {epoch})")]
    Diverged { epoch: usize },

    #[error("probe diverged in selection round {round}: {source}")]
    RoundFailed {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("not a probability distribution (sum {sum})")]
    NotADistribution { sum: f64 },

    #[error("weights are not on the probability simplex: {0:?}")]
    OffSimplex(Vec<f64>),

    #[error("stale score cache: table at coreset version {table}, caller expects {expected}")]
    StaleCache { table: u64, expected: u64 },

    #[error("search space too large: C({n}, {k}) exceeds {limit}")]
    SearchSpaceTooLarge { n: usize, k: usize, limit: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the input data rather than the run itself.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::MissingLabelColumn(_)
                | Error::NonNumeric { .. }
                | Error::NonFinite { .. }
                | Error::InvalidDataset(_)
                | Error::EmptyClass(_)
                | Error::BadBinary(_)
                | Error::ClassTooSmall { .. }
        )
    }
}
