use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Constant predictor: the training mean or the most frequent class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Baseline {
    Mean(f64),
    Majority(usize),
}

impl Baseline {
    pub fn fit_regression(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(ModelError::InvalidInput("empty training set".into()));
        }
        Ok(Self::Mean(y.iter().sum::<f64>() / y.len() as f64))
    }

    /// Ties go to the lower class index.
    pub fn fit_classification(labels: &[usize], n_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(ModelError::InvalidInput("empty training set".into()));
        }
        let mut counts = vec![0usize; n_classes];
        for &c in labels {
            counts[c] += 1;
        }
        let best = (0..n_classes).fold(0, |b, c| if counts[c] > counts[b] { c } else { b });
        Ok(Self::Majority(best))
    }
}
