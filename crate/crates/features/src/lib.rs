//! Feature extraction from aligned road windows.
//!
//! Windows are first resampled to a common length, then every channel is
//! summarised by the same catalog of statistical and temporal descriptors.
//! Columns are named `extractor@channel`, acceleration first, then speed.

pub mod catalog;
pub mod error;
pub mod matrix;
pub mod resample;
pub mod standardize;

pub use catalog::{extract_channel_features, EXTRACTORS, N_EXTRACTORS};
pub use error::{FeatureError, Result};
pub use matrix::{build_feature_matrix, feature_names, CHANNELS};
pub use resample::{resample_segment, DEFAULT_TARGET_LEN};
pub use standardize::Standardizer;
