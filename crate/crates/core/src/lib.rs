//! Shared building blocks for the road roughness pipeline.
//!
//! This crate holds the domain types that flow between pipeline stages
//! (telemetry, reference segments, aligned windows, datasets), the
//! great-circle geometry helpers used by simulation and map matching, the
//! route-ordered splitting schemes, and the regression/classification
//! metrics used for evaluation.

pub mod error;
pub mod geo;
pub mod metrics;
pub mod split;
pub mod types;

pub use error::{CoreError, Result};
pub use geo::{haversine, GeoPoint, Polyline};
pub use metrics::{
    classification_metrics, confusion_matrix, regression_metrics, ClassificationMetrics,
    RegressionMetrics,
};
pub use split::{ordered_kfold, ordered_split, Fold};
pub use types::{
    to_iri_level, AlignedSegment, Dataset, HpValue, Hyperparams, IriLevel, ReferenceSegment,
    TelemetrySample, TelemetryTrace,
};
