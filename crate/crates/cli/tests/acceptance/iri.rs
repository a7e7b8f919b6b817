use std::time::Instant;

use roadrough_core::{GeoPoint, Polyline};
use roadrough_simkit::{build_reference_segments, compute_iri, generate_profile, QuarterCarParams, RoadProfile, IRI_SPEED_MS};

use crate::{ensure, Outcome};

const CLASS_B: f64 = 64e-6;
const FLAT_TOL: f64 = 1e-9;
const HOMOGENEITY_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 5e-3;
const MAX_SECONDS_PER_KM: f64 = 1.0;

fn road(profile: &RoadProfile, s: f64) -> f64 {
    let pos = s / profile.dx;
    let i = pos.floor() as usize;
    if i + 1 >= profile.elevation.len() {
        return *profile.elevation.last().unwrap();
    }
    let f = pos - i as f64;
    (1.0 - f) * profile.elevation[i] + f * profile.elevation[i + 1]
}

/// Fixed-step RK4 on the second-order equations of motion.
fn rk4_iri(profile: &RoadProfile, dt: f64) -> f64 {
    let p = QuarterCarParams::GOLDEN_CAR;
    let v = IRI_SPEED_MS;
    let deriv = |t: f64, x: [f64; 4]| -> [f64; 4] {
        let y = road(profile, v * t);
        let (zs, vs, zu, vu) = (x[0], x[1], x[2], x[3]);
        let fs = p.k2 * (zs - zu) + p.c * (vs - vu);
        [vs, -fs, vu, (fs - p.k1 * (zu - y)) / p.mu]
    };
    let length = profile.length();
    let base = 11.0f64.min(length);
    let slope = (road(profile, base) - profile.elevation[0]) / base;
    let mut x = [profile.elevation[0], slope * v, profile.elevation[0], slope * v];
    let steps = (length / v / dt).round() as usize;
    let h = length / v / steps as f64;
    let mut acc = 0.0;
    let mut prev = (x[1] - x[3]).abs();
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = deriv(t, x);
        let k2 = deriv(t + 0.5 * h, std::array::from_fn(|i| x[i] + 0.5 * h * k1[i]));
        let k3 = deriv(t + 0.5 * h, std::array::from_fn(|i| x[i] + 0.5 * h * k2[i]));
        let k4 = deriv(t + h, std::array::from_fn(|i| x[i] + h * k3[i]));
        x = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let cur = (x[1] - x[3]).abs();
        acc += 0.5 * (prev + cur) * h;
        prev = cur;
    }
    1000.0 * acc / length
}

pub fn check() -> Outcome {
    let flat = compute_iri(&RoadProfile::flat(1000.0, 0.25).unwrap()).unwrap();
    ensure(flat.abs() <= FLAT_TOL, || format!("flat profile IRI {flat:e}"))?;

    let profile = generate_profile(500.0, 0.25, CLASS_B, 77).unwrap();
    let base = compute_iri(&profile).unwrap();
    for alpha in [0.5, 2.0] {
        let scaled = compute_iri(&profile.scaled(alpha)).unwrap();
        let rel = (scaled - alpha * base).abs() / (alpha * base);
        ensure(rel <= HOMOGENEITY_TOL, || format!("homogeneity at alpha {alpha}: rel {rel:e}"))?;
    }

    let mut worst: f64 = 0.0;
    for seed in [2024, 7, 99] {
        let profile = generate_profile(300.0, 0.25, CLASS_B, seed).unwrap();
        let iri = compute_iri(&profile).unwrap();
        let oracle = rk4_iri(&profile, 1e-4);
        let rel = (iri - oracle).abs() / oracle;
        ensure(rel < ORACLE_TOL, || format!("seed {seed}: IRI {iri:.6} vs oracle {oracle:.6}"))?;
        worst = worst.max(rel);
    }

    let profile = generate_profile(5000.0, 0.25, CLASS_B, 1).unwrap();
    let o = GeoPoint::new(46.05, 14.5).unwrap();
    let route = Polyline::new(vec![o, o.offset(profile.length(), 0.0)]).unwrap();
    let start = Instant::now();
    let segs = build_reference_segments(&profile, &route, 10.0).unwrap();
    let per_km = start.elapsed().as_secs_f64() / 5.0;
    ensure(segs.len() == 500, || format!("{} segments on 5 km", segs.len()))?;
    ensure(per_km < MAX_SECONDS_PER_KM, || format!("{per_km:.3} s/km"))?;

    Ok(format!("flat {flat:.1e}, worst oracle rel {worst:.2e}, {per_km:.4} s/km"))
}
