//! Assigning geo-referenced samples to fixed-length reference segments.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use roadrough_core::{haversine, GeoPoint, ReferenceSegment, TelemetryTrace};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::interpolate::Interpolated;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignConfig {
    /// A segment endpoint farther than this from every sample is unmatched, m.
    pub max_distance: f64,
    pub min_samples: usize,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self { max_distance: 15.0, min_samples: 2 }
    }
}

/// The samples of one reference segment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPiece {
    pub seg_id: usize,
    pub iri: f64,
    pub samples: Range<usize>,
    pub t: Vec<f64>,
    pub acc_z: Vec<f64>,
    pub speed: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignReport {
    pub segments: usize,
    pub retained: usize,
    pub no_nearby_samples: usize,
    pub too_few_samples: usize,
    pub unplaced_samples: usize,
}

impl fmt::Display for AlignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "segments={}", self.segments)?;
        writeln!(f, "retained={}", self.retained)?;
        writeln!(f, "dropped_no_nearby_samples={}", self.no_nearby_samples)?;
        writeln!(f, "dropped_too_few_samples={}", self.too_few_samples)?;
        write!(f, "unplaced_samples={}", self.unplaced_samples)
    }
}

/// One entry per reference segment, in the order given; dropped segments are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub pieces: Vec<Option<AlignedPiece>>,
    pub report: AlignReport,
}

/// Grid lookup of the sample closest to a point.
struct SampleIndex<'a> {
    positions: &'a [Option<GeoPoint>],
    origin: GeoPoint,
    cell: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> SampleIndex<'a> {
    fn new(positions: &'a [Option<GeoPoint>], cell: f64) -> Option<Self> {
        let origin = positions.iter().flatten().next().copied()?;
        let mut index = Self { positions, origin, cell, grid: HashMap::new() };
        for (i, p) in positions.iter().enumerate() {
            if let Some(p) = p {
                let key = index.key(p);
                index.grid.entry(key).or_default().push(i);
            }
        }
        Some(index)
    }

    fn key(&self, p: &GeoPoint) -> (i64, i64) {
        let (e, n) = self.origin.local_xy(p);
        ((e / self.cell).floor() as i64, (n / self.cell).floor() as i64)
    }

    /// Nearest sample within `cell` metres; ties go to the earlier sample.
    fn nearest(&self, p: &GeoPoint) -> Option<usize> {
        let (cx, cy) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for &i in self.grid.get(&(cx + dx, cy + dy)).into_iter().flatten() {
                    let d = haversine(p, self.positions[i].as_ref().expect("indexed samples are placed"));
                    if d <= self.cell && best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                        best = Some((d, i));
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }
}

/// Cut the trace at the samples closest to each segment's endpoints.
///
/// A segment keeps the samples from the one nearest its start up to, but not
/// including, the one nearest its end.
pub fn align_segments(
    reference: &[ReferenceSegment],
    positions: &Interpolated,
    trace: &TelemetryTrace,
    config: &AlignConfig,
) -> Result<Alignment> {
    if positions.positions.len() != trace.len() {
        return Err(GeoError::InvalidInput(format!(
            "{} positions for {} samples",
            positions.positions.len(),
            trace.len()
        )));
    }
    if !(config.max_distance > 0.0) || config.min_samples < 2 {
        return Err(GeoError::InvalidInput(format!("bad alignment settings {config:?}")));
    }
    let index = SampleIndex::new(&positions.positions, config.max_distance).ok_or(GeoError::NoBracketingFixes)?;
    let samples = trace.samples();
    let mut report = AlignReport { segments: reference.len(), unplaced_samples: positions.dropped, ..Default::default() };
    let pieces = reference
        .iter()
        .map(|seg| {
            let (Some(a), Some(b)) = (index.nearest(&seg.start), index.nearest(&seg.end)) else {
                report.no_nearby_samples += 1;
                return None;
            };
            if b < a + config.min_samples {
                report.too_few_samples += 1;
                return None;
            }
            report.retained += 1;
            let slice = &samples[a..b];
            Some(AlignedPiece {
                seg_id: seg.seg_id,
                iri: seg.iri,
                samples: a..b,
                t: slice.iter().map(|s| s.t).collect(),
                acc_z: slice.iter().map(|s| s.acc_z).collect(),
                speed: slice.iter().map(|s| s.speed).collect(),
            })
        })
        .collect();
    Ok(Alignment { pieces, report })
}
