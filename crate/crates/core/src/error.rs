use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(String),

    #[error("ragged row at record {record}: expected {expected} fields, found {found}")]
    RaggedRow {
        record: u64,
        expected: usize,
        found: usize,
    },

    #[error("no data rows remain after dropping {dropped} rows with missing values")]
    EmptyTable { dropped: usize },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("column `{0}` is not numeric")]
    NotNumeric(String),

    #[error("column `{0}` is not a factor")]
    NotFactor(String),

    #[error("factor `{0}` has a single observed level")]
    SingleLevelFactor(String),

    #[error("response `{column}` must be numeric or a 2-level factor, found {levels} levels")]
    NonBinaryResponse { column: String, levels: usize },

    #[error("column `{0}` is constant")]
    ConstantColumn(String),

    #[error("invalid holdout: {0}")]
    InvalidHoldout(String),

    #[error("design is rank deficient: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error("too few rows: n = {n} but p = {p}")]
    TooFewRows { n: usize, p: usize },

    #[error("perfect separation detected (coefficient `{coefficient}`)")]
    Separation { coefficient: String },

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("level `{level}` of `{column}` was not seen when the model was fitted")]
    UnseenLevel { column: String, level: String },

    #[error("singular correlation matrix: {0}")]
    SingularCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("plot document has no layers")]
    EmptyDocument,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        match err.kind() {
            csv::ErrorKind::UnequalLengths {
                pos,
                expected_len,
                len,
            } => Error::RaggedRow {
                record: pos.as_ref().map(|p| p.record()).unwrap_or(0),
                expected: *expected_len as usize,
                found: *len as usize,
            },
            _ => Error::Csv(err.to_string()),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
