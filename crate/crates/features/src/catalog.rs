//! The per-channel extractor catalog.
//!
//! Conventions: variances are population variances, quantiles interpolate
//! linearly between order statistics (position `(n - 1) p`), and an ECDF
//! percentile is the smallest sample whose ECDF reaches `p`. Moments that
//! divide by the spread (skewness, kurtosis, autocorrelation) are 0 for a
//! constant channel. The time axis is shifted to start at zero.

use crate::error::{FeatureError, Result};

pub const MIN_LEN: usize = 3;
const ENTROPY_BINS: usize = 10;
const PEAK_NEIGHBOURHOOD: usize = 10;

/// Shared intermediate values for one channel.
pub struct Channel<'a> {
    x: &'a [f64],
    t: Vec<f64>,
    sorted: Vec<f64>,
    diff: Vec<f64>,
    mean: f64,
    var: f64,
}

impl<'a> Channel<'a> {
    fn new(x: &'a [f64], t: &[f64]) -> Self {
        let mut sorted = x.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self {
            x,
            t: t.iter().map(|v| v - t[0]).collect(),
            sorted,
            diff: x.windows(2).map(|w| w[1] - w[0]).collect(),
            mean,
            var,
        }
    }

    fn flat(&self) -> bool {
        self.var <= f64::EPSILON * f64::EPSILON * self.mean * self.mean
    }

    fn central_moment(&self, k: i32) -> f64 {
        self.x.iter().map(|v| (v - self.mean).powi(k)).sum::<f64>() / self.x.len() as f64
    }
}

/// Quantile of sorted data with linear interpolation.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Smallest sample whose ECDF is at least `p`.
pub fn ecdf_percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len() as f64;
    let k = (0..sorted.len()).find(|&k| (k + 1) as f64 >= p * n - 1e-9).unwrap_or(sorted.len() - 1);
    sorted[k]
}

fn trapezoid(t: &[f64], y: impl Iterator<Item = f64>) -> f64 {
    let y: Vec<f64> = y.collect();
    t.windows(2).zip(y.windows(2)).map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1])).sum()
}

fn turning_points(diff: &[f64], rising_first: bool) -> f64 {
    diff.windows(2)
        .filter(|w| if rising_first { w[0] > 0.0 && w[1] < 0.0 } else { w[0] < 0.0 && w[1] > 0.0 })
        .count() as f64
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

type Extractor = fn(&Channel) -> f64;

pub const N_EXTRACTORS: usize = 34;

/// `(name, extractor)` in column order.
pub const EXTRACTORS: [(&str, Extractor); N_EXTRACTORS] = [
    ("mean", |c| c.mean),
    ("median", |c| quantile(&c.sorted, 0.5)),
    ("min", |c| c.sorted[0]),
    ("max", |c| c.sorted[c.sorted.len() - 1]),
    ("variance", |c| c.var),
    ("std", |c| c.var.sqrt()),
    ("mean_abs_dev", |c| c.x.iter().map(|v| (v - c.mean).abs()).sum::<f64>() / c.x.len() as f64),
    ("median_abs_dev", |c| {
        let m = quantile(&c.sorted, 0.5);
        median(&c.x.iter().map(|v| (v - m).abs()).collect::<Vec<_>>())
    }),
    ("mean_diff", |c| mean(&c.diff)),
    ("median_diff", |c| median(&c.diff)),
    ("mean_abs_diff", |c| c.diff.iter().map(|d| d.abs()).sum::<f64>() / c.diff.len() as f64),
    ("median_abs_diff", |c| median(&c.diff.iter().map(|d| d.abs()).collect::<Vec<_>>())),
    ("sum_abs_diff", |c| c.diff.iter().map(|d| d.abs()).sum()),
    ("iqr", |c| quantile(&c.sorted, 0.75) - quantile(&c.sorted, 0.25)),
    ("ecdf_p5", |c| ecdf_percentile(&c.sorted, 0.05)),
    ("ecdf_p20", |c| ecdf_percentile(&c.sorted, 0.2)),
    ("ecdf_p80", |c| ecdf_percentile(&c.sorted, 0.8)),
    ("kurtosis", |c| if c.flat() { 0.0 } else { c.central_moment(4) / (c.var * c.var) - 3.0 }),
    ("skewness", |c| if c.flat() { 0.0 } else { c.central_moment(3) / c.var.powf(1.5) }),
    ("slope", |c| {
        let tm = mean(&c.t);
        let sxx: f64 = c.t.iter().map(|t| (t - tm).powi(2)).sum();
        let sxy: f64 = c.t.iter().zip(c.x).map(|(t, x)| (t - tm) * (x - c.mean)).sum();
        sxy / sxx
    }),
    ("autocorr", |c| {
        if c.flat() {
            return 0.0;
        }
        let num: f64 = c.x.windows(2).map(|w| (w[0] - c.mean) * (w[1] - c.mean)).sum();
        num / (c.var * c.x.len() as f64)
    }),
    ("auc", |c| trapezoid(&c.t, c.x.iter().copied())),
    ("abs_auc_zero_mean", |c| trapezoid(&c.t, c.x.iter().map(|v| (v - c.mean).abs()))),
    ("rms", |c| (c.x.iter().map(|v| v * v).sum::<f64>() / c.x.len() as f64).sqrt()),
    ("abs_energy", |c| c.x.iter().map(|v| v * v).sum()),
    ("total_energy", |c| c.x.iter().map(|v| v * v).sum::<f64>() / c.t[c.t.len() - 1]),
    ("centroid", |c| {
        let energy: f64 = c.x.iter().map(|v| v * v).sum();
        if energy == 0.0 {
            return 0.0;
        }
        c.t.iter().zip(c.x).map(|(t, v)| t * v * v).sum::<f64>() / energy
    }),
    ("entropy", |c| {
        let (lo, hi) = (c.sorted[0], c.sorted[c.sorted.len() - 1]);
        if hi <= lo {
            return 0.0;
        }
        let mut counts = [0usize; ENTROPY_BINS];
        for v in c.x {
            let b = (((v - lo) / (hi - lo)) * ENTROPY_BINS as f64).floor() as usize;
            counts[b.min(ENTROPY_BINS - 1)] += 1;
        }
        let n = c.x.len() as f64;
        counts.iter().filter(|&&k| k > 0).map(|&k| -(k as f64 / n) * (k as f64 / n).log2()).sum()
    }),
    ("distance", |c| c.t.windows(2).zip(&c.diff).map(|(tw, d)| ((tw[1] - tw[0]).powi(2) + d * d).sqrt()).sum()),
    ("positive_turning", |c| turning_points(&c.diff, true)),
    ("negative_turning", |c| turning_points(&c.diff, false)),
    ("zero_crossings", |c| {
        c.x.windows(2).filter(|w| (w[0] - c.mean) * (w[1] - c.mean) < 0.0).count() as f64
    }),
    ("neighbourhood_peaks", |c| {
        let n = PEAK_NEIGHBOURHOOD;
        if c.x.len() <= 2 * n {
            return 0.0;
        }
        (n..c.x.len() - n)
            .filter(|&i| (i - n..=i + n).all(|j| j == i || c.x[i] > c.x[j]))
            .count() as f64
    }),
    ("peak_to_peak", |c| c.sorted[c.sorted.len() - 1] - c.sorted[0]),
];

/// Evaluate the whole catalog on one channel sampled at times `t`.
pub fn extract_channel_features(x: &[f64], t: &[f64]) -> Result<[f64; N_EXTRACTORS]> {
    if x.len() < MIN_LEN {
        return Err(FeatureError::TooShort { len: x.len(), min: MIN_LEN });
    }
    if t.len() != x.len() {
        return Err(FeatureError::InvalidInput(format!("{} samples but {} times", x.len(), t.len())));
    }
    if x.iter().chain(t).any(|v| !v.is_finite()) {
        return Err(FeatureError::InvalidInput("channel contains non-finite values".into()));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FeatureError::InvalidInput("time axis must increase".into()));
    }
    let c = Channel::new(x, t);
    Ok(EXTRACTORS.map(|(_, f)| f(&c)))
}
