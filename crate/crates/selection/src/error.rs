use roadrough_core::CoreError;
use roadrough_features::FeatureError;
use roadrough_models::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("every feature column is constant")]
    AllConstant,

    #[error("data has no variance to explain")]
    NoVariance,

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Features(#[from] FeatureError),

    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, SelectionError>;
