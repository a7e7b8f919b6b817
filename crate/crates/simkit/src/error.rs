use roadrough_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation input: {0}")]
    InvalidInput(String),

    #[error("profile is {length} m long, need at least {min} m")]
    ProfileTooShort { length: f64, min: f64 },

    #[error("route geometry is {route} m but the profile is {profile} m")]
    LengthMismatch { route: f64, profile: f64 },

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, SimError>;
