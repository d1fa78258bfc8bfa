//! Error type shared across the crate.

use std::path::PathBuf;

use crate::month::YearMonth;

/// Everything that can go wrong between ingesting a CSV and emitting a
/// critical-value table.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Filesystem failure while reading or writing `path`.
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A CSV cell or header could not be interpreted. `row` is the
    /// 1-based line number including the header.
    #[error("csv row {row}: {msg}")]
    CsvParse { row: usize, msg: String },

    /// A month string was not of the form `YYYY-MM` with month 01..=12.
    #[error("invalid month {input:?}, expected YYYY-MM")]
    MonthFormat { input: String },

    /// Consecutive rows were not consecutive calendar months. `expected`
    /// is the first missing or out-of-order month.
    #[error("month gap at csv row {row}: expected {expected}, found {found}")]
    MonthGap {
        row: usize,
        expected: YearMonth,
        found: YearMonth,
    },

    /// A value's magnitude exceeded the ingestion cap, which almost always
    /// indicates a unit error in the input.
    #[error("csv row {row}: |{value}| exceeds the magnitude cap {cap:e}")]
    MagnitudeExceeded { row: usize, value: f64, cap: f64 },

    /// A NaN or infinity where a finite value is required.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// A series with zero observations.
    #[error("series is empty")]
    EmptySeries,

    /// Two series that must share a calendar did not.
    #[error("series misaligned: {msg}")]
    Misaligned { msg: String },

    /// An input value outside the mathematical domain of a transform.
    #[error("domain error: {msg}")]
    Domain { msg: String },

    /// The design matrix is rank deficient, so no coefficient estimate
    /// exists.
    #[error("singular design matrix (column {column} is numerically dependent)")]
    SingularDesign { column: usize },

    /// The regression fit is exact to rounding error, so the coefficient
    /// standard error (and with it the t-statistic) is undefined.
    #[error("degenerate fit: residual variance is zero to rounding error")]
    DegenerateFit,

    /// Fewer observations than the regression or sweep needs.
    #[error("insufficient observations: need at least {needed}, got {got}")]
    InsufficientObservations { needed: usize, got: usize },

    /// Every candidate window in a sweep was singular or degenerate.
    #[error("no valid window: all {skipped} candidate windows were singular or degenerate")]
    NoValidWindow { skipped: usize },

    /// Two sequences that must index the same endpoints did not.
    #[error("sequence misaligned: {msg}")]
    SequenceMismatch { msg: String },

    /// A configuration value that is syntactically fine but unusable.
    #[error("invalid parameter {name}: {msg}")]
    InvalidParameter { name: &'static str, msg: String },

    /// A cache entry whose checksum does not match its contents.
    #[error("cache checksum mismatch in {path}")]
    CacheChecksum { path: PathBuf },

    /// A cache entry that cannot be parsed at all.
    #[error("malformed cache entry {path}: {msg}")]
    CacheFormat { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
