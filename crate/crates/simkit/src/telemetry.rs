//! Telemetry of a survey vehicle driving a simulated road.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use roadrough_core::{Polyline, TelemetrySample, TelemetryTrace};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::profile::RoadProfile;
use crate::quarter_car::{initial_slope, QuarterCarParams, QuarterCarSim, MAX_DT};

/// Piecewise-linear speed (m/s) as a function of distance along the route (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    /// `(distance, speed)` knots with increasing distance.
    pub knots: Vec<(f64, f64)>,
}

impl SpeedProfile {
    pub fn constant(speed: f64) -> Self {
        Self { knots: vec![(0.0, speed)] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.knots.is_empty() {
            return Err(SimError::InvalidInput("speed profile has no knots".into()));
        }
        if self.knots.iter().any(|&(_, v)| !(v > 0.0 && v.is_finite())) {
            return Err(SimError::InvalidInput("speed profile values must be positive".into()));
        }
        if self.knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::InvalidInput("speed profile distances must increase".into()));
        }
        Ok(())
    }

    pub fn speed_at(&self, s: f64) -> f64 {
        let k = &self.knots;
        let idx = k.partition_point(|&(d, _)| d <= s);
        if idx == 0 {
            return k[0].1;
        }
        if idx == k.len() {
            return k[k.len() - 1].1;
        }
        let (d0, v0) = k[idx - 1];
        let (d1, v1) = k[idx];
        v0 + (s - d0) / (d1 - d0) * (v1 - v0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub vehicle: QuarterCarParams,
    pub speed_profile: SpeedProfile,
    /// Accelerometer (and speed channel) rate, Hz.
    pub acc_rate: f64,
    /// GPS rate, Hz.
    pub gps_rate: f64,
    /// Per-axis standard deviation of GPS position noise, m.
    pub gps_noise_sigma: f64,
    /// Standard deviation of accelerometer noise, m/s².
    pub acc_noise_sigma: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            vehicle: QuarterCarParams::GOLDEN_CAR,
            speed_profile: SpeedProfile::constant(20.0),
            acc_rate: 50.0,
            gps_rate: 1.0,
            gps_noise_sigma: 3.0,
            acc_noise_sigma: 0.05,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.speed_profile.validate()?;
        if !(self.acc_rate > 0.0 && self.gps_rate > 0.0) {
            return Err(SimError::InvalidInput("sampling rates must be positive".into()));
        }
        if self.gps_rate > self.acc_rate {
            return Err(SimError::InvalidInput("GPS rate cannot exceed the accelerometer rate".into()));
        }
        if !(self.gps_noise_sigma >= 0.0 && self.acc_noise_sigma >= 0.0) {
            return Err(SimError::InvalidInput("noise levels must be >= 0".into()));
        }
        Ok(())
    }
}

/// A simulated trace plus the true distance travelled at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTelemetry {
    pub trace: TelemetryTrace,
    /// True chainage along the route, m.
    pub chainage: Vec<f64>,
}

/// Simulate the survey vehicle over `profile`, which runs along `route`.
///
/// The vehicle follows the speed profile; its quarter-car response is
/// integrated with sub-steps of at most 5 ms and the sprung acceleration is
/// sampled at `acc_rate` with additive Gaussian noise. A GPS fix (true
/// position plus isotropic Gaussian noise) is attached to the sample nearest
/// each GPS epoch.
pub fn synthesize_telemetry(profile: &RoadProfile, route: &Polyline, config: &SimConfig) -> Result<SyntheticTelemetry> {
    config.validate()?;
    let length = profile.length();
    let tol = profile.dx.max(1e-4 * length);
    if (route.length() - length).abs() > tol {
        return Err(SimError::LengthMismatch { route: route.length(), profile: length });
    }

    let sample_dt = 1.0 / config.acc_rate;
    let substeps = (sample_dt / MAX_DT).ceil().max(1.0) as usize;
    let dt = sample_dt / substeps as f64;
    let mut sim = QuarterCarSim::new(config.vehicle, dt)?;
    let v0 = config.speed_profile.speed_at(0.0);
    sim.reset_on_ramp(profile.elevation[0], initial_slope(profile) * v0);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let acc_noise = Normal::new(0.0, config.acc_noise_sigma).map_err(|e| SimError::InvalidInput(e.to_string()))?;
    let gps_noise = Normal::new(0.0, config.gps_noise_sigma).map_err(|e| SimError::InvalidInput(e.to_string()))?;
    let gps_every = config.acc_rate / config.gps_rate;

    let mut samples = Vec::new();
    let mut chainage = Vec::new();
    let mut s = 0.0;
    let mut next_fix = 0usize;
    let mut i = 0usize;
    loop {
        let t = i as f64 * sample_dt;
        let speed = config.speed_profile.speed_at(s);
        let acc = sim.sprung_acceleration() + acc_noise.sample(&mut rng);
        let gps = if (next_fix as f64 * gps_every).round() as usize == i {
            next_fix += 1;
            let p = route.point_at(s);
            Some(p.offset(gps_noise.sample(&mut rng), gps_noise.sample(&mut rng)))
        } else {
            None
        };
        samples.push(TelemetrySample { t, acc_z: acc, speed, gps });
        chainage.push(s);

        // advance one sample interval; distance by the midpoint rule
        let mut s_next = s;
        for _ in 0..substeps {
            let mid = s_next + 0.5 * dt * config.speed_profile.speed_at(s_next);
            s_next += dt * config.speed_profile.speed_at(mid);
            sim.step(profile.elevation_at(s_next));
        }
        if s_next > length {
            break;
        }
        s = s_next;
        i += 1;
    }
    Ok(SyntheticTelemetry { trace: TelemetryTrace::new(samples)?, chainage })
}
