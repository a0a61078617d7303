use thiserror::Error;

pub type Result<T> = std::result::Result<T, DcovError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DcovError {
    #[error("non-finite value in {series} at position {index}")]
    NonFinite { series: &'static str, index: usize },

    #[error("length mismatch: x has {x} elements, y has {y}")]
    LengthMismatch { x: usize, y: usize },

    #[error("empty sample")]
    Empty,

    /// The estimator needs strictly more than `min_exclusive` observations.
    #[error("sample too small (n>{min_exclusive} required): got n={n}")]
    SampleTooSmall { n: usize, min_exclusive: usize },

    #[error("index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("n={n} exceeds the direct-method memory cap of {cap}; pass the large-sample override to proceed")]
    TooLarge { n: usize, cap: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("input: {0}")]
    Input(String),

    #[error("fast and direct results disagree at n={n}: fast={fast}, direct={direct}")]
    Mismatch { n: usize, fast: f64, direct: f64 },
}

pub(crate) fn require_more_than(n: usize, min_exclusive: usize) -> Result<()> {
    if n > min_exclusive {
        Ok(())
    } else {
        Err(DcovError::SampleTooSmall { n, min_exclusive })
    }
}
