//! Simulation kit: synthetic road profiles, the quarter-car reference
//! response that defines IRI, and telemetry as recorded by a survey vehicle
//! driving the same road.

pub mod error;
pub mod profile;
pub mod quarter_car;
pub mod reference;
pub mod telemetry;

pub use error::{Result, SimError};
pub use profile::{generate_profile, generate_sectioned_profile, RoadProfile, RoughnessSection};
pub use quarter_car::{
    compute_iri, quarter_car_response, QuarterCarParams, QuarterCarSim, Response, IRI_SPEED_MS, MAX_DT,
};
pub use reference::build_reference_segments;
pub use telemetry::{synthesize_telemetry, SimConfig, SpeedProfile, SyntheticTelemetry};
