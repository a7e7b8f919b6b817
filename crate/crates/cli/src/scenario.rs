//! Synthetic survey: corridor network, sectioned road profile, reference IRI
//! and the vehicle's telemetry.
//!
//! The vehicle runs over a second profile with the same roughness envelope,
//! correlated with the reference one by `wheel_path_correlation`.

use anyhow::Result;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadrough_core::{GeoPoint, Polyline, ReferenceSegment, TelemetryTrace};
use roadrough_geoalign::{synth, RoadNetwork};
use roadrough_simkit::{
    build_reference_segments, generate_sectioned_profile, RoadProfile, synthesize_telemetry, QuarterCarParams, RoughnessSection,
    SimConfig, SpeedProfile,
};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;

/// `G₀` of ISO class B and the long-run IRI it produces.
const CLASS_B_G0: f64 = 64e-6;
const CLASS_B_IRI: f64 = 4.36;

/// Roughness coefficient whose long-run IRI is `iri`.
pub fn g0_for_iri(iri: f64) -> f64 {
    CLASS_B_G0 * (iri / CLASS_B_IRI).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub start_m: f64,
    /// Index into the low, medium, high class mix.
    pub class: usize,
    pub target_iri: f64,
    pub roughness_coeff: f64,
}

/// Everything the simulate stage produces that later stages do not read
/// back from the CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub route_length_m: f64,
    pub network_nodes: usize,
    pub network_edges: usize,
    pub sections: Vec<Section>,
    pub speed_knots: Vec<(f64, f64)>,
    pub vehicle: QuarterCarParams,
    pub samples: usize,
    pub fixes: usize,
    pub reference_segments: usize,
}

pub struct Scenario {
    pub network: RoadNetwork,
    pub route: Polyline,
    pub reference: Vec<ReferenceSegment>,
    pub telemetry: TelemetryTrace,
    pub summary: ScenarioSummary,
}

fn sections(cfg: &ScenarioConfig, length: f64, rng: &mut ChaCha8Rng) -> Vec<Section> {
    let deck: Vec<usize> = cfg.class_mix.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
    let mut out = Vec::new();
    let mut hand: Vec<usize> = Vec::new();
    let mut start = 0.0;
    while start < length {
        if hand.is_empty() {
            hand = deck.clone();
            hand.shuffle(rng);
        }
        let class = hand.pop().expect("refilled");
        let [lo, hi] = cfg.class_iri[class];
        let target_iri = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
        out.push(Section { start_m: start, class, target_iri, roughness_coeff: g0_for_iri(target_iri) });
        start += rng.random_range(cfg.section_min_m..=cfg.section_max_m);
    }
    out
}

fn speed_knots(cfg: &ScenarioConfig, length: f64, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let mut knots = Vec::new();
    let mut d = 0.0;
    while d < length {
        knots.push((d, rng.random_range(cfg.speed_min_ms..=cfg.speed_max_ms)));
        d += rng.random_range(cfg.speed_knot_min_m..=cfg.speed_knot_max_m);
    }
    knots
}

pub fn simulate(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    let origin = GeoPoint::new(cfg.origin_lat, cfg.origin_lon)?;
    let corridor = synth::corridor(origin, cfg.length_m, cfg.node_spacing_m, seed)?;
    let route = corridor.route;
    let length = route.length();

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let sections = sections(cfg, length, &mut rng);
    let knots = speed_knots(cfg, length, &mut rng);
    let vehicle = QuarterCarParams::GOLDEN_CAR.perturbed(cfg.vehicle_perturbation, &mut rng);

    let envelope: Vec<RoughnessSection> =
        sections.iter().map(|s| RoughnessSection { start: s.start_m, roughness_coeff: s.roughness_coeff }).collect();
    let profile = generate_sectioned_profile(length, cfg.profile_dx_m, &envelope, cfg.section_ramp_m, seed.wrapping_add(2))?;
    let reference = build_reference_segments(&profile, &route, cfg.segment_length_m)?;
    let driven = if cfg.wheel_path_correlation < 1.0 {
        let other = generate_sectioned_profile(length, cfg.profile_dx_m, &envelope, cfg.section_ramp_m, seed.wrapping_add(4))?;
        let rho = cfg.wheel_path_correlation;
        let rest = (1.0 - rho * rho).sqrt();
        let elevation = profile.elevation.iter().zip(&other.elevation).map(|(a, b)| rho * a + rest * b).collect();
        RoadProfile::new(profile.dx, elevation)?
    } else {
        profile
    };
    let sim = SimConfig {
        vehicle,
        speed_profile: SpeedProfile { knots: knots.clone() },
        acc_rate: cfg.acc_rate_hz,
        gps_rate: cfg.gps_rate_hz,
        gps_noise_sigma: cfg.gps_noise_sigma_m,
        acc_noise_sigma: cfg.acc_noise_sigma,
        seed: seed.wrapping_add(3),
    };
    let telemetry = synthesize_telemetry(&driven, &route, &sim)?.trace;

    let summary = ScenarioSummary {
        route_length_m: length,
        network_nodes: corridor.network.node_count(),
        network_edges: corridor.network.edges().len(),
        sections,
        speed_knots: knots,
        vehicle,
        samples: telemetry.len(),
        fixes: telemetry.fixes().len(),
        reference_segments: reference.len(),
    };
    Ok(Scenario { network: corridor.network, route, reference, telemetry, summary })
}
