//! Feature selection and dimension reduction.

pub mod constant;
pub mod error;
pub mod pca;
pub mod pipeline;
pub mod sfs;

pub use constant::drop_constant;
pub use error::{Result, SelectionError};
pub use pca::{pca_fit, PcaBasis};
pub use pipeline::{FeaturePipeline, FittedPipeline};
pub use sfs::{sfs_forward, SfsConfig, SfsResult};
