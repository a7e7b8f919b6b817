use ndarray::Array2;
use rayon::prelude::*;
use roadrough_core::{AlignedSegment, Dataset};

use crate::catalog::{extract_channel_features, EXTRACTORS, N_EXTRACTORS};
use crate::error::{FeatureError, Result};

pub const CHANNELS: [&str; 2] = ["acc_z", "speed"];

/// Column names, `extractor@channel`, acceleration columns first.
pub fn feature_names() -> Vec<String> {
    CHANNELS
        .iter()
        .flat_map(|ch| EXTRACTORS.iter().map(move |(name, _)| format!("{name}@{ch}")))
        .collect()
}

/// One row per window, in the given order, with IRI targets and levels.
pub fn build_feature_matrix(segments: &[AlignedSegment]) -> Result<Dataset> {
    let Some(first) = segments.first() else {
        return Err(FeatureError::InvalidInput("no segments".into()));
    };
    let len = first.t.len();
    if let Some(s) = segments.iter().find(|s| s.t.len() != len) {
        return Err(FeatureError::InvalidInput(format!(
            "window {} has {} samples, expected {len}; resample first",
            s.window_id,
            s.t.len()
        )));
    }
    let names = feature_names();
    let rows: Vec<Vec<f64>> = segments
        .par_iter()
        .map(|s| {
            let mut row = Vec::with_capacity(2 * N_EXTRACTORS);
            row.extend(extract_channel_features(&s.acc_z, &s.t)?);
            row.extend(extract_channel_features(&s.speed, &s.t)?);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut x = Array2::zeros((segments.len(), names.len()));
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(FeatureError::NonFinite { row: segments[r].window_id, name: names[c].clone(), value: v });
            }
            x[[r, c]] = v;
        }
    }
    Ok(Dataset::from_iri(x, segments.iter().map(|s| s.iri).collect(), names)?)
}
