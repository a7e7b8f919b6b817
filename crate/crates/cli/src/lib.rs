//! Configuration-driven orchestration of the roughness pipeline.

pub mod config;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod scenario;

pub use config::{FeatureSet, PipelineConfig, Stage, Stages};
pub use pipeline::{assemble_report, run_pipeline, run_stage, ModelBundle, PipelineError, RunReport};
pub use report::{export_report, ReportFormat};
