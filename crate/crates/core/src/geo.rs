//! Great-circle geometry on WGS84 coordinates.
//!
//! Distances use the haversine formula on a sphere of mean Earth radius.
//! Short-range work (edge projections, noise injection) uses a local
//! equirectangular tangent plane, which is accurate to well below a
//! centimetre over the few hundred metres it is applied to.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !(lat.is_finite() && (-90.0..=90.0).contains(&lat)) {
            return Err(CoreError::InvalidInput(format!("latitude {lat} outside [-90, 90]")));
        }
        if !(lon.is_finite() && (-180.0..=180.0).contains(&lon)) {
            return Err(CoreError::InvalidInput(format!("longitude {lon} outside [-180, 180]")));
        }
        Ok(Self { lat, lon })
    }

    /// Point displaced by `east`/`north` metres in the local tangent plane.
    pub fn offset(&self, east: f64, north: f64) -> GeoPoint {
        let dlat = north / EARTH_RADIUS_M;
        let dlon = east / (EARTH_RADIUS_M * self.lat.to_radians().cos());
        GeoPoint {
            lat: self.lat + dlat.to_degrees(),
            lon: self.lon + dlon.to_degrees(),
        }
    }

    /// Local (east, north) metres of `other` relative to `self`.
    pub fn local_xy(&self, other: &GeoPoint) -> (f64, f64) {
        let mid_lat = (0.5 * (self.lat + other.lat)).to_radians();
        let east = (other.lon - self.lon).to_radians() * EARTH_RADIUS_M * mid_lat.cos();
        let north = (other.lat - self.lat).to_radians() * EARTH_RADIUS_M;
        (east, north)
    }

    /// Linear interpolation in coordinate space; `f = 0` gives `self`.
    pub fn lerp(&self, other: &GeoPoint, f: f64) -> GeoPoint {
        GeoPoint {
            lat: self.lat + f * (other.lat - self.lat),
            lon: self.lon + f * (other.lon - self.lon),
        }
    }
}

/// Haversine great-circle distance in metres.
pub fn haversine(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (lat1, lat2) = (a.lat.to_radians(), b.lat.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let h = (0.5 * dlat).sin().powi(2) + lat1.cos() * lat2.cos() * (0.5 * dlon).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Projection of `p` onto the straight segment `a`→`b`.
///
/// Returns the clamped segment parameter in `[0, 1]` and the projected point.
pub fn project_onto_segment(a: &GeoPoint, b: &GeoPoint, p: &GeoPoint) -> (f64, GeoPoint) {
    // one longitude scale for all three points keeps coordinate lerp straight
    let scale = (0.5 * (a.lat + b.lat)).to_radians().cos();
    let xy = |q: &GeoPoint| ((q.lon - a.lon) * scale, q.lat - a.lat);
    let (bx, by) = xy(b);
    let (px, py) = xy(p);
    let len2 = bx * bx + by * by;
    if len2 == 0.0 {
        return (0.0, *a);
    }
    let f = ((px * bx + py * by) / len2).clamp(0.0, 1.0);
    (f, a.lerp(b, f))
}

/// A path of geographic vertices with cumulative great-circle chainage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    points: Vec<GeoPoint>,
    chainage: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<GeoPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(CoreError::InvalidInput("polyline needs at least two points".into()));
        }
        let mut chainage = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        chainage.push(0.0);
        for w in points.windows(2) {
            acc += haversine(&w[0], &w[1]);
            chainage.push(acc);
        }
        Ok(Self { points, chainage })
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn chainage(&self) -> &[f64] {
        &self.chainage
    }

    pub fn length(&self) -> f64 {
        *self.chainage.last().unwrap_or(&0.0)
    }

    /// Point at distance `s` metres from the start, clamped to the ends.
    pub fn point_at(&self, s: f64) -> GeoPoint {
        let s = s.clamp(0.0, self.length());
        // first vertex with chainage >= s
        let idx = self.chainage.partition_point(|&c| c < s);
        if idx == 0 {
            return self.points[0];
        }
        let (c0, c1) = (self.chainage[idx - 1], self.chainage[idx]);
        let f = if c1 > c0 { (s - c0) / (c1 - c0) } else { 0.0 };
        self.points[idx - 1].lerp(&self.points[idx], f)
    }

    /// Local heading (unit east/north vector) of the piece containing `s`.
    pub fn direction_at(&self, s: f64) -> (f64, f64) {
        let s = s.clamp(0.0, self.length());
        let idx = self.chainage.partition_point(|&c| c < s).clamp(1, self.points.len() - 1);
        let (e, n) = self.points[idx - 1].local_xy(&self.points[idx]);
        let norm = (e * e + n * n).sqrt();
        if norm == 0.0 {
            (1.0, 0.0)
        } else {
            (e / norm, n / norm)
        }
    }

    /// Closest point on the path: `(chainage, distance)`.
    pub fn project(&self, p: &GeoPoint) -> (f64, f64) {
        let mut best = (0.0, f64::INFINITY);
        for (i, w) in self.points.windows(2).enumerate() {
            let (f, q) = project_onto_segment(&w[0], &w[1], p);
            let d = haversine(p, &q);
            if d < best.1 {
                best = (self.chainage[i] + f * (self.chainage[i + 1] - self.chainage[i]), d);
            }
        }
        best
    }
}
