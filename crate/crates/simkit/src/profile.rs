//! Random longitudinal road profiles.
//!
//! Profiles are sums of cosines at the harmonic spatial frequencies
//! `n_k = k / (M·dx)` with uniformly random phases and amplitudes
//! `sqrt(2·G(n_k)·Δn)`, where `G(n) = G₀·(n/n₀)⁻²` is the displacement PSD.
//! The sum is evaluated with one inverse FFT.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Reference spatial frequency, cycles/m.
pub const REFERENCE_FREQ: f64 = 0.1;
/// Lowest synthesized spatial frequency, cycles/m (90 m wavelength).
pub const MIN_FREQ: f64 = 0.011;
/// Highest synthesized spatial frequency, cycles/m.
pub const MAX_FREQ: f64 = 2.83;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    /// Uniform spatial step, m.
    pub dx: f64,
    /// Elevation samples, m.
    pub elevation: Vec<f64>,
}

impl RoadProfile {
    pub fn new(dx: f64, elevation: Vec<f64>) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(SimError::InvalidInput(format!("profile step must be positive, got {dx}")));
        }
        if elevation.len() < 2 {
            return Err(SimError::InvalidInput("profile needs at least two samples".into()));
        }
        if let Some(i) = elevation.iter().position(|v| !v.is_finite()) {
            return Err(SimError::InvalidInput(format!("elevation sample {i} is not finite")));
        }
        Ok(Self { dx, elevation })
    }

    pub fn flat(length: f64, dx: f64) -> Result<Self> {
        let n = (length / dx + 1e-9).floor() as usize + 1;
        Self::new(dx, vec![0.0; n])
    }

    /// `dx · (count − 1)`, metres.
    pub fn length(&self) -> f64 {
        self.dx * (self.elevation.len() - 1) as f64
    }

    /// Linearly interpolated elevation at distance `s`, clamped to the ends.
    pub fn elevation_at(&self, s: f64) -> f64 {
        let last = self.elevation.len() - 1;
        let pos = (s / self.dx).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let f = pos - i as f64;
        self.elevation[i] + f * (self.elevation[i + 1] - self.elevation[i])
    }

    pub fn scaled(&self, factor: f64) -> RoadProfile {
        RoadProfile { dx: self.dx, elevation: self.elevation.iter().map(|v| v * factor).collect() }
    }

    /// The piece `[start, end)` in sample indices.
    pub fn slice(&self, start: usize, end: usize) -> Result<RoadProfile> {
        if end > self.elevation.len() || start + 2 > end {
            return Err(SimError::InvalidInput(format!("bad profile slice {start}..{end}")));
        }
        RoadProfile::new(self.dx, self.elevation[start..end].to_vec())
    }
}

/// Stationary random profile with displacement PSD `G₀·(n/n₀)⁻²`.
///
/// `roughness_coeff` is `G₀` in m³ at `n₀ = 0.1` cycles/m.
pub fn generate_profile(length: f64, dx: f64, roughness_coeff: f64, seed: u64) -> Result<RoadProfile> {
    if !(dx > 0.0) {
        return Err(SimError::InvalidInput(format!("profile step must be positive, got {dx}")));
    }
    if dx > 0.25 {
        return Err(SimError::InvalidInput(format!("profile step {dx} m exceeds 0.25 m")));
    }
    if !(length >= 100.0) {
        return Err(SimError::ProfileTooShort { length, min: 100.0 });
    }
    if !(roughness_coeff >= 0.0 && roughness_coeff.is_finite()) {
        return Err(SimError::InvalidInput(format!("roughness coefficient {roughness_coeff} must be >= 0")));
    }
    let n = (length / dx + 1e-9).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = unit_profile(n, dx, &mut rng);
    let scale = roughness_coeff.sqrt();
    RoadProfile::new(dx, unit.into_iter().map(|v| v * scale).collect())
}

/// A stretch of road with its own roughness coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughnessSection {
    /// Start distance, m.
    pub start: f64,
    /// `G₀`, m³.
    pub roughness_coeff: f64,
}

/// Profile whose roughness changes between sections.
///
/// A unit-spectrum profile is scaled by `sqrt(G₀(x))`; the envelope ramps
/// between neighbouring sections with a raised cosine of width `ramp` metres
/// so that section joints do not inject steps.
pub fn generate_sectioned_profile(
    length: f64,
    dx: f64,
    sections: &[RoughnessSection],
    ramp: f64,
    seed: u64,
) -> Result<RoadProfile> {
    if sections.is_empty() {
        return Err(SimError::InvalidInput("at least one roughness section is required".into()));
    }
    if sections.windows(2).any(|w| w[1].start <= w[0].start) {
        return Err(SimError::InvalidInput("roughness sections must have increasing starts".into()));
    }
    if sections.iter().any(|s| !(s.roughness_coeff >= 0.0)) {
        return Err(SimError::InvalidInput("roughness coefficients must be >= 0".into()));
    }
    let base = generate_profile(length, dx, 1.0, seed)?;
    let amp: Vec<f64> = sections.iter().map(|s| s.roughness_coeff.sqrt()).collect();
    let envelope = |x: f64| -> f64 {
        let idx = sections.partition_point(|s| s.start <= x).saturating_sub(1);
        let here = amp[idx];
        // blend into the next section over the last `ramp` metres of this one
        if let Some(next) = sections.get(idx + 1) {
            let to_next = next.start - x;
            if ramp > 0.0 && to_next < 0.5 * ramp {
                let f = 0.5 - to_next / ramp; // 0 at ramp start, 0.5 at the joint
                let w = 0.5 - 0.5 * (std::f64::consts::PI * f).cos();
                return here + w * (amp[idx + 1] - here);
            }
        }
        if idx > 0 && ramp > 0.0 {
            let from_prev = x - sections[idx].start;
            if from_prev < 0.5 * ramp {
                let f = 0.5 + from_prev / ramp; // 0.5 at the joint, 1 at ramp end
                let w = 0.5 - 0.5 * (std::f64::consts::PI * f).cos();
                return amp[idx - 1] + w * (here - amp[idx - 1]);
            }
        }
        here
    };
    let elevation = base
        .elevation
        .iter()
        .enumerate()
        .map(|(i, v)| v * envelope(i as f64 * dx))
        .collect();
    RoadProfile::new(dx, elevation)
}

/// Unit-`G₀` profile of `n` samples, mean removed.
fn unit_profile(n: usize, dx: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = n.next_power_of_two().max(2);
    let dn = 1.0 / (m as f64 * dx);
    let mut spectrum = vec![Complex::new(0.0, 0.0); m];
    for (k, bin) in spectrum.iter_mut().enumerate().take(m / 2 + 1).skip(1) {
        // draw the phase for every bin so the sequence does not depend on the band
        let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        let freq = k as f64 * dn;
        if !(MIN_FREQ..=MAX_FREQ).contains(&freq) {
            continue;
        }
        let psd = (freq / REFERENCE_FREQ).powi(-2);
        let amplitude = (2.0 * psd * dn).sqrt();
        *bin = Complex::from_polar(amplitude, phase);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(m).process(&mut spectrum);
    let mut out: Vec<f64> = spectrum[..n].iter().map(|c| c.re).collect();
    let mean = out.iter().sum::<f64>() / n as f64;
    out.iter_mut().for_each(|v| *v -= mean);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficient_gives_flat_profile() {
        let p = generate_profile(200.0, 0.25, 0.0, 3).unwrap();
        assert_eq!(p.elevation.len(), 801);
        assert!(p.elevation.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_profile(150.0, 0.25, 16e-6, 42).unwrap();
        let b = generate_profile(150.0, 0.25, 16e-6, 42).unwrap();
        let c = generate_profile(150.0, 0.25, 16e-6, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_profile(200.0, 0.0, 1e-6, 1).is_err());
        assert!(generate_profile(200.0, -0.1, 1e-6, 1).is_err());
        assert!(generate_profile(200.0, 0.5, 1e-6, 1).is_err());
        assert!(generate_profile(50.0, 0.25, 1e-6, 1).is_err());
    }

    #[test]
    fn profile_is_zero_mean_with_expected_length() {
        let p = generate_profile(1000.0, 0.1, 64e-6, 9).unwrap();
        assert!((p.length() - 1000.0).abs() < 1e-9);
        let mean = p.elevation.iter().sum::<f64>() / p.elevation.len() as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn elevation_interpolates_linearly() {
        let p = RoadProfile::new(0.5, vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(p.elevation_at(0.25), 0.5);
        assert_eq!(p.elevation_at(0.75), 2.0);
        assert_eq!(p.elevation_at(5.0), 3.0);
    }

    #[test]
    fn sections_scale_roughness() {
        let sections = [
            RoughnessSection { start: 0.0, roughness_coeff: 1e-6 },
            RoughnessSection { start: 500.0, roughness_coeff: 100e-6 },
        ];
        let p = generate_sectioned_profile(1000.0, 0.25, &sections, 20.0, 5).unwrap();
        let rms = |a: usize, b: usize| {
            let d: Vec<f64> = p.elevation[a..b].windows(2).map(|w| w[1] - w[0]).collect();
            (d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64).sqrt()
        };
        // slope RMS scales with sqrt(G0): factor 10 between the sections
        let ratio = rms(2400, 3900) / rms(100, 1900);
        assert!(ratio > 7.0 && ratio < 14.0, "{ratio}");
    }
}
