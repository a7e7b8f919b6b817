use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadrough_core::{GeoPoint, Polyline};
use roadrough_geoalign::synth::{random_route, toy_grid};
use roadrough_geoalign::{build_lattice, map_match, viterbi, MatchParams};
use roadrough_simkit::{synthesize_telemetry, RoadProfile, SimConfig, SpeedProfile};

use crate::{ensure, Outcome};

const TOY_EDGES: usize = 50;
const MIN_RECOVERY: f64 = 0.95;
const GPS_SIGMA_M: f64 = 3.0;
const SCORE_TOL: f64 = 1e-9;

/// Best score over every state sequence, enumerated directly.
fn exhaustive(emissions: &[Vec<f64>], transitions: &[Vec<Vec<f64>>]) -> (Vec<usize>, f64) {
    let sizes: Vec<usize> = emissions.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for code in 0..total {
        let mut c = code;
        let path: Vec<usize> = sizes
            .iter()
            .map(|&s| {
                let v = c % s;
                c /= s;
                v
            })
            .collect();
        let mut score = emissions[0][path[0]];
        for t in 1..path.len() {
            score += transitions[t - 1][path[t - 1]][path[t]] + emissions[t][path[t]];
        }
        if score > best.1 {
            best = (path, score);
        }
    }
    best
}

fn simulate(route: &Polyline, sigma: f64, seed: u64) -> (Vec<(f64, GeoPoint)>, Vec<f64>) {
    let profile = RoadProfile::flat(route.length(), 0.25).unwrap();
    let cfg = SimConfig {
        speed_profile: SpeedProfile::constant(15.0),
        gps_noise_sigma: sigma,
        acc_noise_sigma: 0.0,
        seed,
        ..Default::default()
    };
    let sim = synthesize_telemetry(&profile, route, &cfg).unwrap();
    let fixes = sim.trace.fixes();
    let chain = fixes.iter().map(|(i, _, _)| sim.chainage[*i]).collect();
    (fixes.into_iter().map(|(_, t, p)| (t, p)).collect(), chain)
}

/// Route edges entered before the last fix.
fn driven_edges(route_edges: &[usize], route: &Polyline, last_chainage: f64) -> Vec<usize> {
    route_edges.iter().zip(route.chainage()).filter(|(_, &c)| c + 1e-6 < last_chainage).map(|(e, _)| *e).collect()
}

fn lcs(a: &[usize], b: &[usize]) -> usize {
    let mut dp = vec![vec![0; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            dp[i][j] = if a[i - 1] == b[j - 1] { dp[i - 1][j - 1] + 1 } else { dp[i - 1][j].max(dp[i][j - 1]) };
        }
    }
    dp[a.len()][b.len()]
}

fn random_lattices() -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut count = 0;
    for _ in 0..500 {
        let steps = rng.random_range(1..=6);
        let sizes: Vec<usize> = (0..steps).map(|_| rng.random_range(1..=5)).collect();
        let emissions: Vec<Vec<f64>> = sizes.iter().map(|&s| (0..s).map(|_| rng.random_range(-20.0..0.0)).collect()).collect();
        let transitions: Vec<Vec<Vec<f64>>> = sizes
            .windows(2)
            .map(|w| {
                (0..w[0])
                    .map(|_| {
                        (0..w[1])
                            .map(|_| if rng.random_bool(0.15) { f64::NEG_INFINITY } else { rng.random_range(-20.0..0.0) })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let (_, oracle) = exhaustive(&emissions, &transitions);
        match viterbi(&emissions, &transitions) {
            Ok((_, score)) => ensure((score - oracle).abs() <= SCORE_TOL, || format!("lattice score {score} vs {oracle}"))?,
            Err(_) => ensure(oracle == f64::NEG_INFINITY, || "viterbi failed on a feasible lattice".into())?,
        }
        count += 1;
    }
    Ok(count)
}

pub fn check() -> Outcome {
    let origin = GeoPoint::new(55.68, 12.57).unwrap();
    let net = toy_grid(origin);
    ensure(net.edges().len() == TOY_EDGES, || format!("toy grid has {} edges", net.edges().len()))?;

    for seed in 0..10u64 {
        let (edges, route) = random_route(&net, (seed as usize * 7) % net.node_count(), 15, seed).unwrap();
        let (fixes, chain) = simulate(&route, 0.0, seed);
        let matched = map_match(&fixes, &net, &MatchParams::default()).unwrap();
        let truth = driven_edges(&edges, &route, *chain.last().unwrap());
        ensure(matched.edge_path == truth, || format!("noiseless seed {seed}: {:?} vs {truth:?}", matched.edge_path))?;
    }

    let (mut hit, mut total) = (0, 0);
    for seed in 0..20u64 {
        let (edges, route) = random_route(&net, (seed as usize * 11) % net.node_count(), 15, 100 + seed).unwrap();
        let (fixes, chain) = simulate(&route, GPS_SIGMA_M, 200 + seed);
        let matched = map_match(&fixes, &net, &MatchParams::default()).unwrap();
        let truth = driven_edges(&edges, &route, *chain.last().unwrap());
        hit += lcs(&truth, &matched.edge_path);
        total += truth.len();
    }
    let recovery = hit as f64 / total as f64;
    ensure(recovery >= MIN_RECOVERY, || format!("edge recovery {recovery:.4} ({hit}/{total})"))?;

    let lattices = random_lattices()?;
    let params = MatchParams { max_candidates: 5, ..Default::default() };
    for seed in 0..20u64 {
        let (_, route) = random_route(&net, seed as usize % net.node_count(), 3, seed).unwrap();
        let (fixes, _) = simulate(&route, 6.0, seed);
        let step = (fixes.len() / 6).max(1);
        let sub: Vec<_> = fixes.iter().step_by(step).take(6).copied().collect();
        let lattice = build_lattice(&sub, &net, &params).unwrap();
        let (path, score) = exhaustive(&lattice.emissions, &lattice.transitions);
        let matched = map_match(&sub, &net, &params).unwrap();
        ensure((matched.log_score - score).abs() <= SCORE_TOL, || format!("trace {seed}: {} vs {score}", matched.log_score))?;
        for (t, f) in matched.fixes.iter().enumerate() {
            ensure(f.edge == lattice.candidates[t][path[t]].edge, || format!("trace {seed}: fix {t} on another edge"))?;
        }
    }

    Ok(format!("recovery {recovery:.4} ({hit}/{total}) at 3 m, {lattices} lattices and 20 traces equal enumeration"))
}
