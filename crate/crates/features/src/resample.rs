use roadrough_core::AlignedSegment;

use crate::error::{FeatureError, Result};

/// 250 samples per 100 m window: about 5 s at 50 Hz and 72 km/h.
pub const DEFAULT_TARGET_LEN: usize = 250;

fn interp(t: &[f64], x: &[f64], at: f64) -> f64 {
    let k = t.partition_point(|&v| v <= at);
    if k == 0 {
        return x[0];
    }
    if k == t.len() {
        return x[t.len() - 1];
    }
    let f = (at - t[k - 1]) / (t[k] - t[k - 1]);
    x[k - 1] + f * (x[k] - x[k - 1])
}

/// Linearly interpolate every channel onto `target_len` evenly spaced times
/// over the original time span.
pub fn resample_segment(segment: &AlignedSegment, target_len: usize) -> Result<AlignedSegment> {
    let n = segment.t.len();
    if n < 2 {
        return Err(FeatureError::TooShort { len: n, min: 2 });
    }
    if target_len < 2 {
        return Err(FeatureError::InvalidInput(format!("target length {target_len} < 2")));
    }
    let (t0, t1) = (segment.t[0], segment.t[n - 1]);
    let step = (t1 - t0) / (target_len - 1) as f64;
    let t: Vec<f64> = (0..target_len)
        .map(|i| if i + 1 == target_len { t1 } else { t0 + i as f64 * step })
        .collect();
    let channel = |x: &[f64]| -> Vec<f64> {
        let mut out: Vec<f64> = t.iter().map(|&at| interp(&segment.t, x, at)).collect();
        out[0] = x[0];
        out[target_len - 1] = x[n - 1];
        out
    };
    let acc = channel(&segment.acc_z);
    let speed = channel(&segment.speed);
    Ok(AlignedSegment::new(segment.window_id, t, acc, speed, segment.iri)?)
}
