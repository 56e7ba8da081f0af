//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- series construction and splitting ---
    #[error("length mismatch: {what} has length {actual}, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        actual: usize,
    },
    #[error("timestamps are not strictly increasing at position {index}")]
    NonMonotonicTimestamps { index: usize },
    #[error("timestamp at position {index} is {found}, expected {expected} for {periodicity} periodicity")]
    PeriodicityViolation {
        index: usize,
        found: String,
        expected: String,
        periodicity: String,
    },
    #[error("missing value at position {index}")]
    MissingValue { index: usize },
    #[error("non-finite value {value} at position {index}")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("insufficient history: need at least {required} observations, have {available}")]
    InsufficientHistory { required: usize, available: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    // --- forecasters ---
    #[error("forecaster history is empty")]
    EmptyHistory,
    #[error("season length {season} exceeds history length {available}")]
    SeasonTooLong { season: usize, available: usize },
    #[error("order {order} exceeds history length {available}")]
    OrderTooLong { order: usize, available: usize },
    #[error("smoothing parameter {0} is outside (0, 1]")]
    AlphaOutOfRange(f64),
    #[error("predict called before fit")]
    NotFitted,
    #[error("forecaster returned {actual} values for horizon {expected}")]
    BadForecast { expected: usize, actual: usize },

    // --- backtest and metrics ---
    #[error("no expanding-window split fits a series of length {len} with horizon {horizon}")]
    SplitExhausted { len: usize, horizon: usize },
    #[error("every reference value is zero; MAPE is undefined")]
    AllReferenceZero,

    // --- features ---
    #[error("unknown regressor `{0}`")]
    UnknownRegressor(String),
    #[error("regressor `{name}` has no value at index {index}")]
    RegressorUnavailable { name: String, index: usize },
    #[error("holiday calendar {path} is unreadable: {reason}")]
    HolidayCalendarUnreadable { path: String, reason: String },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),

    // --- gradient boosting ---
    #[error("training set is empty or has fewer than two rows")]
    EmptyTraining,
    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("feature {index} is not finite ({value})")]
    NonFiniteFeature { index: usize, value: f64 },

    // --- TreeSHAP ---
    #[error("tree {tree} node {node} has zero cover")]
    MissingCover { tree: usize, node: usize },
    #[error("brute-force Shapley supports at most {max} features, got {actual}")]
    TooManyFeatures { max: usize, actual: usize },

    // --- explainer ---
    #[error("surrogate has only {rows} training rows (need at least {required})")]
    SurrogateUnderdetermined { rows: usize, required: usize },
    #[error("horizon step {step} outside 1..={horizon}")]
    HorizonOutOfRange { step: usize, horizon: usize },
    #[error("empty interval {start}..={end}")]
    EmptyInterval { start: usize, end: usize },
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` is constant over the training rows")]
    DegenerateRange(String),
    #[error("{what}: base + sum(phi) = {sum}, surrogate output = {prediction}")]
    LocalAccuracy {
        what: String,
        sum: f64,
        prediction: f64,
    },

    // --- robustness ---
    #[error("moving-average order {0} must be odd")]
    EvenOrder(usize),
    #[error("block length {block} exceeds residual length {available}")]
    BlockTooLong { block: usize, available: usize },
    #[error("correlation undefined: {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("all feature importances are zero")]
    AllZeroImportance,

    // --- cli / io ---
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("cannot read input {path}: {reason}")]
    InputUnreadable { path: String, reason: String },
    #[error("nothing to plot")]
    EmptyData,
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigInvalid(_) | Error::DuplicateFeature(_) => 2,
            Error::InputUnreadable { .. } => 3,
            Error::Io(_) | Error::Json(_) => 5,
            Error::Dataset(_) => 6,
            _ => 4,
        }
    }

    pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}
