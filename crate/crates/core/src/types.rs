use std::collections::BTreeMap;
use std::fmt;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geo::GeoPoint;

/// One in-vehicle sample: time, vertical acceleration, speed and an optional fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySample {
    /// Seconds since trace start.
    pub t: f64,
    /// Vertical acceleration, m/s².
    pub acc_z: f64,
    /// Vehicle speed, m/s.
    pub speed: f64,
    pub gps: Option<GeoPoint>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TelemetryTrace {
    samples: Vec<TelemetrySample>,
}

impl TelemetryTrace {
    pub fn new(samples: Vec<TelemetrySample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.acc_z.is_finite() && s.speed.is_finite()) {
                return Err(CoreError::InvalidInput(format!("sample {i} is not finite")));
            }
            if s.speed < 0.0 {
                return Err(CoreError::InvalidInput(format!("sample {i} has negative speed")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(CoreError::InvalidInput(format!(
                "timestamps not strictly increasing at sample {}",
                i + 1
            )));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TelemetrySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(sample index, time, fix)` for every sample carrying a GPS fix.
    pub fn fixes(&self) -> Vec<(usize, f64, GeoPoint)> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.gps.map(|g| (i, s.t, g)))
            .collect()
    }
}

/// A geo-referenced reference measurement over a short road piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSegment {
    pub seg_id: usize,
    pub start: GeoPoint,
    pub end: GeoPoint,
    /// Metres.
    pub length: f64,
    /// m/km.
    pub iri: f64,
}

/// A fixed-length road window with its sensor channels and averaged IRI label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSegment {
    /// Ordinal index along the route.
    pub window_id: usize,
    /// Sample times (seconds), strictly increasing.
    pub t: Vec<f64>,
    pub acc_z: Vec<f64>,
    pub speed: Vec<f64>,
    /// Mean IRI over the window, m/km.
    pub iri: f64,
    pub n_points: usize,
}

impl AlignedSegment {
    pub fn new(window_id: usize, t: Vec<f64>, acc_z: Vec<f64>, speed: Vec<f64>, iri: f64) -> Result<Self> {
        if t.len() != acc_z.len() {
            return Err(CoreError::LengthMismatch { left: t.len(), right: acc_z.len() });
        }
        if t.len() != speed.len() {
            return Err(CoreError::LengthMismatch { left: t.len(), right: speed.len() });
        }
        if t.len() < 2 {
            return Err(CoreError::InvalidInput(format!(
                "window {window_id} holds {} samples, need at least 2",
                t.len()
            )));
        }
        if !(iri >= 0.0 && iri.is_finite()) {
            return Err(CoreError::InvalidInput(format!("window {window_id} has IRI {iri}")));
        }
        let n_points = t.len();
        Ok(Self { window_id, t, acc_z, speed, iri, n_points })
    }
}

/// Ordinal roughness class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IriLevel {
    Low,
    Medium,
    High,
}

impl IriLevel {
    pub const ALL: [IriLevel; 3] = [IriLevel::Low, IriLevel::Medium, IriLevel::High];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            IriLevel::Low => "low",
            IriLevel::Medium => "medium",
            IriLevel::High => "high",
        }
    }
}

impl fmt::Display for IriLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for IriLevel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(IriLevel::Low),
            "medium" => Ok(IriLevel::Medium),
            "high" => Ok(IriLevel::High),
            other => Err(CoreError::InvalidInput(format!("unknown IRI level '{other}'"))),
        }
    }
}

/// Upper bound (inclusive) of the Low class, m/km.
pub const LOW_MAX_IRI: f64 = 0.9;
/// Upper bound (inclusive) of the Medium class, m/km.
pub const MEDIUM_MAX_IRI: f64 = 2.5;

/// Map an IRI value to its severity class.
///
/// Medium covers the whole of (0.9, 2.5] so that the three classes
/// partition the non-negative axis.
pub fn to_iri_level(iri: f64) -> Result<IriLevel> {
    if !(iri >= 0.0) || !iri.is_finite() {
        return Err(CoreError::InvalidInput(format!("IRI must be finite and non-negative, got {iri}")));
    }
    Ok(if iri <= LOW_MAX_IRI {
        IriLevel::Low
    } else if iri <= MEDIUM_MAX_IRI {
        IriLevel::Medium
    } else {
        IriLevel::High
    })
}

/// Feature matrix with continuous and ordinal targets, rows in route order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub level: Vec<IriLevel>,
    pub feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Vec<f64>, level: Vec<IriLevel>, feature_names: Vec<String>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(CoreError::LengthMismatch { left: x.nrows(), right: y.len() });
        }
        if y.len() != level.len() {
            return Err(CoreError::LengthMismatch { left: y.len(), right: level.len() });
        }
        if x.ncols() != feature_names.len() {
            return Err(CoreError::LengthMismatch { left: x.ncols(), right: feature_names.len() });
        }
        if let Some((idx, _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(CoreError::InvalidInput(format!("non-finite value at row {} column {}", idx.0, idx.1)));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(CoreError::InvalidInput(format!("non-finite target at row {i}")));
        }
        Ok(Self { x, y, level, feature_names })
    }

    /// Build from targets only; levels are derived from the IRI values.
    pub fn from_iri(x: Array2<f64>, y: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        let level = y.iter().map(|&v| to_iri_level(v)).collect::<Result<Vec<_>>>()?;
        Self::new(x, y, level, feature_names)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            level: rows.iter().map(|&i| self.level[i]).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(1), cols),
            y: self.y.clone(),
            level: self.level.clone(),
            feature_names: cols.iter().map(|&j| self.feature_names[j].clone()).collect(),
        }
    }

    pub fn class_indices(&self) -> Vec<usize> {
        self.level.iter().map(|l| l.index()).collect()
    }
}

/// One hyperparameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HpValue {
    Int(i64),
    Num(f64),
    Layers(Vec<usize>),
    Text(String),
}

impl HpValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            HpValue::Int(v) => Some(*v as f64),
            HpValue::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_usize(&self) -> Option<usize> {
        match self {
            HpValue::Int(v) if *v >= 0 => Some(*v as usize),
            HpValue::Num(v) if *v >= 0.0 && v.fract() == 0.0 => Some(*v as usize),
            _ => None,
        }
    }
}

impl fmt::Display for HpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HpValue::Int(v) => write!(f, "{v}"),
            HpValue::Num(v) => write!(f, "{v}"),
            HpValue::Layers(v) => {
                let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            HpValue::Text(s) => f.write_str(s),
        }
    }
}

/// Named hyperparameters of one model configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Hyperparams(pub BTreeMap<String, HpValue>);

impl Hyperparams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: HpValue) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<&HpValue> {
        self.0.get(name)
    }

    pub fn f64_or(&self, name: &str, default: f64) -> Result<f64> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| CoreError::InvalidInput(format!("hyperparameter '{name}' must be numeric, got {v}"))),
        }
    }

    pub fn usize_or(&self, name: &str, default: usize) -> Result<usize> {
        match self.0.get(name) {
            None => Ok(default),
            Some(v) => v.as_usize().ok_or_else(|| {
                CoreError::InvalidInput(format!("hyperparameter '{name}' must be a non-negative integer, got {v}"))
            }),
        }
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}
