//! Linear quarter-car model and the IRI computed from it.
//!
//! State `[z_s, ż_s, z_u, ż_u]` (sprung/unsprung displacement and velocity),
//! parameters normalised by the sprung mass:
//!
//! ```text
//! z̈_s   = −k2 (z_s − z_u) − c (ż_s − ż_u)
//! μ z̈_u =  k2 (z_s − z_u) + c (ż_s − ż_u) − k1 (z_u − y)
//! ```
//!
//! The road input `y(t)` is treated as piecewise linear between steps and the
//! system is advanced with the exact state-transition matrix of that
//! first-order hold, so stepping error only enters through how well the input
//! is represented, never through the integrator.

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::profile::RoadProfile;

/// Reference speed of the IRI definition, 80 km/h.
pub const IRI_SPEED_MS: f64 = 80.0 / 3.6;
/// Largest accepted integration step, s.
pub const MAX_DT: f64 = 0.005;
/// Shortest profile an IRI is computed for, m.
pub const MIN_IRI_LENGTH: f64 = 10.0;
/// Base length for the initial-slope estimate, m.
const INIT_BASE: f64 = 11.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterCarParams {
    /// Tire spring rate over sprung mass, 1/s².
    pub k1: f64,
    /// Suspension spring rate over sprung mass, 1/s².
    pub k2: f64,
    /// Suspension damping over sprung mass, 1/s.
    pub c: f64,
    /// Unsprung to sprung mass ratio.
    pub mu: f64,
}

impl QuarterCarParams {
    /// The standard reference vehicle used by the IRI.
    pub const GOLDEN_CAR: QuarterCarParams = QuarterCarParams { k1: 653.0, k2: 63.3, c: 6.0, mu: 0.15 };

    pub fn validate(&self) -> Result<()> {
        let all = [self.k1, self.k2, self.c, self.mu];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SimError::InvalidInput(format!("quarter-car parameters must be positive: {self:?}")));
        }
        Ok(())
    }

    /// Each parameter scaled by an independent factor in `[1 − frac, 1 + frac]`.
    pub fn perturbed<R: Rng>(&self, frac: f64, rng: &mut R) -> QuarterCarParams {
        let mut f = || 1.0 + frac * (2.0 * rng.random::<f64>() - 1.0);
        QuarterCarParams { k1: self.k1 * f(), k2: self.k2 * f(), c: self.c * f(), mu: self.mu * f() }
    }

    fn system(&self) -> (SMatrix<f64, 4, 4>, SVector<f64, 4>) {
        let (k1, k2, c, mu) = (self.k1, self.k2, self.c, self.mu);
        #[rustfmt::skip]
        let a = SMatrix::<f64, 4, 4>::new(
            0.0,      1.0,     0.0,              0.0,
            -k2,      -c,      k2,               c,
            0.0,      0.0,     0.0,              1.0,
            k2 / mu,  c / mu,  -(k1 + k2) / mu,  -c / mu,
        );
        (a, SVector::<f64, 4>::new(0.0, 0.0, 0.0, k1 / mu))
    }

    /// Total mechanical energy per unit sprung mass for zero road input.
    pub fn energy(&self, state: &[f64; 4]) -> f64 {
        let [zs, vs, zu, vu] = *state;
        0.5 * vs * vs + 0.5 * self.mu * vu * vu + 0.5 * self.k2 * (zs - zu).powi(2) + 0.5 * self.k1 * zu * zu
    }
}

impl Default for QuarterCarParams {
    fn default() -> Self {
        Self::GOLDEN_CAR
    }
}

/// Fixed-step simulator with first-order-hold input.
#[derive(Debug, Clone)]
pub struct QuarterCarSim {
    params: QuarterCarParams,
    phi: SMatrix<f64, 4, 4>,
    gamma_level: SVector<f64, 4>,
    gamma_rate: SVector<f64, 4>,
    dt: f64,
    state: SVector<f64, 4>,
    input: f64,
}

impl QuarterCarSim {
    /// Unlike [`QuarterCarParams::validate`], zero damping is accepted here.
    pub fn new(params: QuarterCarParams, dt: f64) -> Result<Self> {
        let QuarterCarParams { k1, k2, c, mu } = params;
        if ![k1, k2, mu].iter().all(|v| v.is_finite() && *v > 0.0) || !(c >= 0.0 && c.is_finite()) {
            return Err(SimError::InvalidInput(format!("invalid quarter-car parameters: {params:?}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let (a, b) = params.system();
        // exp of [[A, B, 0], [0, 0, 1], [0, 0, 0]]·dt yields Φ and the two hold gains
        let mut aug = SMatrix::<f64, 6, 6>::zeros();
        aug.fixed_view_mut::<4, 4>(0, 0).copy_from(&a);
        aug.fixed_view_mut::<4, 1>(0, 4).copy_from(&b);
        aug[(4, 5)] = 1.0;
        let e = (aug * dt).exp();
        Ok(Self {
            params,
            phi: e.fixed_view::<4, 4>(0, 0).into_owned(),
            gamma_level: e.fixed_view::<4, 1>(0, 4).into_owned(),
            gamma_rate: e.fixed_view::<4, 1>(0, 5).into_owned() / dt,
            dt,
            state: SVector::zeros(),
            input: 0.0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn params(&self) -> &QuarterCarParams {
        &self.params
    }

    /// Set the state and the current road elevation.
    pub fn reset(&mut self, state: [f64; 4], input: f64) {
        self.state = SVector::from(state);
        self.input = input;
    }

    /// Steady state for travel over a ramp of elevation `y0` and the given
    /// vertical velocity: both masses ride the road with no relative motion.
    pub fn reset_on_ramp(&mut self, y0: f64, vertical_velocity: f64) {
        self.reset([y0, vertical_velocity, y0, vertical_velocity], y0);
    }

    /// Advance one step to road elevation `next_input`.
    pub fn step(&mut self, next_input: f64) {
        let delta = next_input - self.input;
        self.state = self.phi * self.state + self.gamma_level * self.input + self.gamma_rate * delta;
        self.input = next_input;
    }

    pub fn state(&self) -> [f64; 4] {
        [self.state[0], self.state[1], self.state[2], self.state[3]]
    }

    /// Sprung-mass vertical acceleration at the current state.
    pub fn sprung_acceleration(&self) -> f64 {
        let [zs, vs, zu, vu] = self.state();
        -self.params.k2 * (zs - zu) - self.params.c * (vs - vu)
    }

    /// Suspension stroke rate `ż_s − ż_u`.
    pub fn relative_velocity(&self) -> f64 {
        self.state[1] - self.state[3]
    }
}

/// Time series produced by driving a profile at constant speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub t: Vec<f64>,
    pub z_s: Vec<f64>,
    pub z_u: Vec<f64>,
    pub v_s: Vec<f64>,
    pub v_u: Vec<f64>,
    pub acc_s: Vec<f64>,
}

impl Response {
    /// `∫|ż_s − ż_u| dt` by the trapezoid rule.
    pub fn accumulated_stroke(&self) -> f64 {
        let rel: Vec<f64> = self.v_s.iter().zip(&self.v_u).map(|(a, b)| (a - b).abs()).collect();
        rel.windows(2).zip(self.t.windows(2)).map(|(r, t)| 0.5 * (r[0] + r[1]) * (t[1] - t[0])).sum()
    }
}

/// Initial vertical velocity from the mean slope of the first 11 m.
pub(crate) fn initial_slope(profile: &RoadProfile) -> f64 {
    let base = INIT_BASE.min(profile.length());
    (profile.elevation_at(base) - profile.elevation[0]) / base
}

/// Drive `profile` at constant `speed` with step `dt`.
///
/// The road input is the linearly interpolated elevation at `speed · t`.
/// The vehicle starts in the steady state for the mean slope of the first 11 m.
pub fn quarter_car_response(profile: &RoadProfile, speed: f64, params: &QuarterCarParams, dt: f64) -> Result<Response> {
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(SimError::InvalidInput(format!("speed must be positive, got {speed}")));
    }
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(SimError::InvalidInput(format!("time step {dt} s outside (0, {MAX_DT}]")));
    }
    if let Some(i) = profile.elevation.iter().position(|v| !v.is_finite()) {
        return Err(SimError::InvalidInput(format!("profile sample {i} is not finite")));
    }
    params.validate()?;
    let mut sim = QuarterCarSim::new(*params, dt)?;
    let duration = profile.length() / speed;
    let steps = (duration / dt + 1e-9).floor() as usize;
    let y0 = profile.elevation[0];
    sim.reset_on_ramp(y0, initial_slope(profile) * speed);

    let mut out = Response {
        t: Vec::with_capacity(steps + 1),
        z_s: Vec::with_capacity(steps + 1),
        z_u: Vec::with_capacity(steps + 1),
        v_s: Vec::with_capacity(steps + 1),
        v_u: Vec::with_capacity(steps + 1),
        acc_s: Vec::with_capacity(steps + 1),
    };
    let mut record = |sim: &QuarterCarSim, t: f64| {
        let [zs, vs, zu, vu] = sim.state();
        out.t.push(t);
        out.z_s.push(zs);
        out.v_s.push(vs);
        out.z_u.push(zu);
        out.v_u.push(vu);
        out.acc_s.push(sim.sprung_acceleration());
    };
    record(&sim, 0.0);
    for k in 1..=steps {
        let t = k as f64 * dt;
        sim.step(profile.elevation_at(speed * t));
        record(&sim, t);
    }
    Ok(out)
}

/// Integration step used for IRI: the profile sample interval at 80 km/h,
/// subdivided until it is no larger than [`MAX_DT`].
pub fn iri_step(dx: f64) -> (f64, usize) {
    aligned_step(dx, MAX_DT)
}

/// Largest step not above `max_dt` that divides the time between profile
/// samples at 80 km/h, so every profile knot falls on a step boundary and
/// the first-order hold reproduces the piecewise-linear road exactly.
fn aligned_step(dx: f64, max_dt: f64) -> (f64, usize) {
    let sample_dt = dx / IRI_SPEED_MS;
    let substeps = (sample_dt / max_dt - 1e-12).ceil().max(1.0) as usize;
    (sample_dt / substeps as f64, substeps)
}

/// International Roughness Index of a profile, m/km.
///
/// Accumulated suspension stroke of the reference quarter-car driven at
/// 80 km/h, divided by the distance travelled.
pub fn compute_iri(profile: &RoadProfile) -> Result<f64> {
    compute_iri_with_step(profile, MAX_DT)
}

/// [`compute_iri`] with the integration step capped at `max_dt`.
pub fn compute_iri_with_step(profile: &RoadProfile, max_dt: f64) -> Result<f64> {
    if profile.length() < MIN_IRI_LENGTH - 1e-9 {
        return Err(SimError::ProfileTooShort { length: profile.length(), min: MIN_IRI_LENGTH });
    }
    if !(max_dt > 0.0) {
        return Err(SimError::InvalidInput(format!("time step must be positive, got {max_dt}")));
    }
    let (dt, _) = aligned_step(profile.dx, max_dt.min(MAX_DT));
    let response = quarter_car_response(profile, IRI_SPEED_MS, &QuarterCarParams::GOLDEN_CAR, dt)?;
    let travelled = *response.t.last().unwrap() * IRI_SPEED_MS;
    Ok(1000.0 * response.accumulated_stroke() / travelled)
}
