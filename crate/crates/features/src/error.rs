use roadrough_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("channel has {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("window {row} feature {name} is not finite ({value})")]
    NonFinite { row: usize, name: String, value: f64 },

    #[error("feature column {column} has zero spread on the fitting rows")]
    ZeroSpread { column: usize },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, FeatureError>;
