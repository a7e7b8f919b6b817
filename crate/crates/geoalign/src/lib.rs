//! Geographic alignment of vehicle telemetry with reference roughness data.
//!
//! The stages mirror how the data is prepared: GPS fixes are snapped to a
//! road network with an HMM map matcher, every sensor sample is then
//! geo-referenced by interpolating along the matched path, the samples are
//! assigned to the reference segments whose endpoints they are closest to,
//! and finally consecutive segments are pooled into overlapping windows.

pub mod align;
pub mod error;
pub mod interpolate;
pub mod matching;
pub mod network;
pub mod synth;
pub mod windows;

pub use align::{align_segments, AlignConfig, AlignReport, AlignedPiece, Alignment};
pub use error::{GeoError, Result};
pub use interpolate::{interpolate_positions, Interpolated};
pub use matching::{build_lattice, map_match, viterbi, Candidate, Lattice, MatchParams, MatchedFix, MatchedTrace};
pub use network::{Edge, RoadNetwork};
pub use windows::{sliding_windows, WindowReport, PIECES_PER_WINDOW};
