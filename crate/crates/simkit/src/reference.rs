//! Reference IRI per fixed-length road piece, as a profiler would report it.

use roadrough_core::{Polyline, ReferenceSegment};

use crate::error::{Result, SimError};
use crate::profile::RoadProfile;
use crate::quarter_car::{initial_slope, iri_step, QuarterCarParams, QuarterCarSim, IRI_SPEED_MS};

/// Cut the route into consecutive `seg_len` pieces and report each piece's IRI.
///
/// One reference quarter-car run covers the whole profile, so the filter
/// state carries over between pieces. A trailing remainder shorter than
/// `seg_len` is not reported.
pub fn build_reference_segments(profile: &RoadProfile, route: &Polyline, seg_len: f64) -> Result<Vec<ReferenceSegment>> {
    if !(seg_len > 0.0 && seg_len.is_finite()) {
        return Err(SimError::InvalidInput(format!("segment length must be positive, got {seg_len}")));
    }
    let length = profile.length();
    if length + 1e-9 < seg_len {
        return Err(SimError::ProfileTooShort { length, min: seg_len });
    }
    let tol = profile.dx.max(1e-4 * length);
    if (route.length() - length).abs() > tol {
        return Err(SimError::LengthMismatch { route: route.length(), profile: length });
    }

    let n_segments = (length / seg_len + 1e-9).floor() as usize;
    let (dt, substeps) = iri_step(profile.dx);
    let step_len = dt * IRI_SPEED_MS;
    let total_steps = (profile.elevation.len() - 1) * substeps;

    let mut sim = QuarterCarSim::new(QuarterCarParams::GOLDEN_CAR, dt)?;
    sim.reset_on_ramp(profile.elevation[0], initial_slope(profile) * IRI_SPEED_MS);
    let mut stroke = vec![0.0; n_segments];
    let mut prev = sim.relative_velocity().abs();
    for k in 1..=total_steps {
        let s = k as f64 * step_len;
        sim.step(profile.elevation_at(s));
        let cur = sim.relative_velocity().abs();
        // each trapezoid goes to the piece holding its midpoint
        let mid = s - 0.5 * step_len;
        let piece = (mid / seg_len).floor() as usize;
        if piece < n_segments {
            stroke[piece] += 0.5 * (prev + cur) * dt;
        }
        prev = cur;
    }

    Ok((0..n_segments)
        .map(|i| {
            let a = i as f64 * seg_len;
            let b = a + seg_len;
            ReferenceSegment {
                seg_id: i,
                start: route.point_at(a * route.length() / length),
                end: route.point_at(b * route.length() / length),
                length: seg_len,
                iri: 1000.0 * stroke[i] / seg_len,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compute_iri;
    use roadrough_core::{haversine, GeoPoint};

    fn route(length: f64) -> Polyline {
        let o = GeoPoint::new(55.6, 12.4).unwrap();
        Polyline::new(vec![o, o.offset(length, 0.0)]).unwrap()
    }

    #[test]
    fn hundred_metres_in_ten_metre_pieces() {
        let p = crate::generate_profile(100.0, 0.25, 32e-6, 8).unwrap();
        let segs = build_reference_segments(&p, &route(100.0), 10.0).unwrap();
        assert_eq!(segs.len(), 10);
        for w in segs.windows(2) {
            assert!(haversine(&w[0].end, &w[1].start) < 1e-9);
        }
        assert!(haversine(&segs[0].start, &route(100.0).point_at(0.0)) < 1e-9);
        assert!(haversine(&segs[9].end, &route(100.0).point_at(100.0)) < 1e-6);
    }

    #[test]
    fn flat_profile_gives_zero_everywhere() {
        let p = RoadProfile::flat(100.0, 0.25).unwrap();
        let segs = build_reference_segments(&p, &route(100.0), 10.0).unwrap();
        assert!(segs.iter().all(|s| s.iri == 0.0));
    }

    #[test]
    fn piece_average_equals_whole_profile_iri() {
        let p = crate::generate_profile(200.0, 0.25, 32e-6, 3).unwrap();
        let segs = build_reference_segments(&p, &route(200.0), 10.0).unwrap();
        let mean = segs.iter().map(|s| s.iri).sum::<f64>() / segs.len() as f64;
        let whole = compute_iri(&p).unwrap();
        assert!((mean - whole).abs() < 1e-9 * whole.max(1.0), "{mean} vs {whole}");
    }

    #[test]
    fn rejects_bad_lengths() {
        let p = RoadProfile::flat(100.0, 0.25).unwrap();
        assert!(build_reference_segments(&p, &route(100.0), 0.0).is_err());
        assert!(build_reference_segments(&p, &route(100.0), 150.0).is_err());
        assert!(build_reference_segments(&p, &route(80.0), 10.0).is_err());
    }
}
