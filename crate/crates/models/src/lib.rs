//! Model families for roughness regression and level classification.

pub mod adasyn;
pub mod baseline;
pub mod error;
pub mod family;
pub mod forest;
pub mod grid;
pub mod knn;
pub mod linear;
pub mod logistic;
pub mod mlp;
pub mod naive_bayes;
pub mod optim;
pub mod svm;

pub use error::{ModelError, Result};
pub use family::{fit_model, Family, Model, Task};
pub use forest::Targets;
pub use grid::{grid_search, FitOptions, GridResult, Preprocess, Transform};
