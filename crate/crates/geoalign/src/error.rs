use roadrough_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("invalid road network: {0}")]
    InvalidNetwork(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("GPS fix {index} has no road edge within {radius} m")]
    UnmatchedFix { index: usize, radius: f64 },

    #[error("no route connects the candidates of fix {from} to those of fix {to}")]
    BrokenTrace { from: usize, to: usize },

    #[error("no telemetry sample lies between two matched fixes")]
    NoBracketingFixes,

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, GeoError>;
