use thiserror::Error;

/// Errors produced by the mining engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("trace {trace}: event {index} has no concept:name")]
    MissingActivity { trace: String, index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("undefined distribution for activity {0}")]
    UndefinedDistribution(String),

    #[error("enumeration budget exceeded after {partial} elements")]
    BudgetExceeded { partial: usize },

    #[error("transition {transition} is not enabled; missing input places {missing:?}")]
    NotEnabled { transition: usize, missing: Vec<usize> },

    #[error("unsupported net: {0}")]
    UnsupportedNet(String),

    #[error("no feasible alignment")]
    InfeasibleAlignment,

    #[error("model has no path to a final marking")]
    NoPath,

    #[error("empty pattern list")]
    EmptyPatternList,

    #[error("trace {trace}: event {index} has no timestamp")]
    MissingTimestamp { trace: String, index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable numeric code, shared by the CLI exit path and the C interface.
    pub fn code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Syntax { .. } | Error::MissingActivity { .. } | Error::Row { .. } => 2,
            Error::Config(_) | Error::InvalidArgument(_) => 3,
            Error::UndefinedDistribution(_) => 4,
            Error::BudgetExceeded { .. } => 5,
            Error::NotEnabled { .. } => 6,
            Error::UnsupportedNet(_) | Error::NoPath | Error::InfeasibleAlignment => 7,
            Error::EmptyPatternList => 8,
            Error::MissingTimestamp { .. } => 9,
            Error::Io(_) => 10,
            Error::Json(_) => 11,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
