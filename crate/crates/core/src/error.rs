use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix does not have the declared structure: {0}")]
    Structure(String),

    #[error("size {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("matrix is numerically singular (sigma_min / sigma_max = {0:e})")]
    Singular(f64),

    #[error("unknown float format `{0}` (expected fp16, bf16, fp32 or fp64)")]
    UnknownFormat(String),

    #[error("cannot parse method `{0}`")]
    UnknownMethod(String),

    #[error("malformed dataset: {0}")]
    Dataset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
