use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{FeatureError, Result};

/// Per-column centring and scaling learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    /// Population standard deviation.
    pub std: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: &Array2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(FeatureError::InvalidInput("cannot standardize zero rows".into()));
        }
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let std = x.std_axis(Axis(0), 0.0);
        if let Some(column) = std.iter().position(|&s| !(s > 0.0)) {
            return Err(FeatureError::ZeroSpread { column });
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(FeatureError::InvalidInput(format!(
                "{} columns, standardizer fitted on {}",
                x.ncols(),
                self.mean.len()
            )));
        }
        Ok((x - &self.mean) / &self.std)
    }
}
