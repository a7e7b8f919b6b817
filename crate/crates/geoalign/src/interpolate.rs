//! Geo-referencing every sensor sample from the sparse matched fixes.

use roadrough_core::{GeoPoint, TelemetryTrace};

use crate::error::{GeoError, Result};
use crate::matching::MatchedTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    /// Position per sample; `None` outside the span of the matched fixes.
    pub positions: Vec<Option<GeoPoint>>,
    /// Distance along the matched path per sample.
    pub chainage: Vec<Option<f64>>,
    /// Samples left without a position.
    pub dropped: usize,
}

/// Place each sample on the matched path assuming constant speed between
/// consecutive fixes.
pub fn interpolate_positions(trace: &TelemetryTrace, matched: &MatchedTrace) -> Result<Interpolated> {
    let times: Vec<f64> = matched.fixes.iter().map(|f| f.t).collect();
    let chain = &matched.fix_chainage;
    let mut positions = Vec::with_capacity(trace.len());
    let mut chainage = Vec::with_capacity(trace.len());
    let mut dropped = 0;
    for s in trace.samples() {
        // first fix strictly after the sample
        let k = times.partition_point(|&t| t <= s.t);
        let c = if k == 0 || (k == times.len() && s.t > times[k - 1]) {
            None
        } else if k == times.len() {
            Some(chain[k - 1])
        } else {
            let f = (s.t - times[k - 1]) / (times[k] - times[k - 1]);
            Some(chain[k - 1] + f * (chain[k] - chain[k - 1]))
        };
        match c {
            Some(c) => {
                positions.push(Some(matched.path.point_at(c)));
                chainage.push(Some(c));
            }
            None => {
                dropped += 1;
                positions.push(None);
                chainage.push(None);
            }
        }
    }
    if dropped == trace.len() {
        return Err(GeoError::NoBracketingFixes);
    }
    if dropped > 0 {
        log::warn!("{dropped} of {} samples lie outside the matched fixes and were dropped", trace.len());
    }
    Ok(Interpolated { positions, chainage, dropped })
}
