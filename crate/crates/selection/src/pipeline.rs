//! Standardization followed by optional PCA, fitted per training block.

use ndarray::{Array2, ArrayView2};
use roadrough_features::Standardizer;
use roadrough_models::grid::{Preprocess, Transform};
use roadrough_models::ModelError;
use serde::{Deserialize, Serialize};

use crate::pca::{pca_fit, PcaBasis};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    /// Variance share PCA keeps; `None` skips PCA.
    pub pca_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub standardizer: Standardizer,
    pub pca: Option<PcaBasis>,
}

fn wrap(e: impl std::fmt::Display) -> ModelError {
    ModelError::Preprocess(e.to_string())
}

impl Transform for FittedPipeline {
    fn transform(&self, x: ArrayView2<f64>) -> roadrough_models::Result<Array2<f64>> {
        let z = self.standardizer.apply(&x.to_owned()).map_err(wrap)?;
        match &self.pca {
            Some(p) => p.transform(z.view()).map_err(wrap),
            None => Ok(z),
        }
    }
}

impl Preprocess for FeaturePipeline {
    type Fitted = FittedPipeline;

    fn fit(&self, x: ArrayView2<f64>) -> roadrough_models::Result<FittedPipeline> {
        let standardizer = Standardizer::fit(&x.to_owned()).map_err(wrap)?;
        let pca = match self.pca_target {
            Some(t) => Some(pca_fit(standardizer.apply(&x.to_owned()).map_err(wrap)?.view(), t).map_err(wrap)?),
            None => None,
        };
        Ok(FittedPipeline { standardizer, pca })
    }
}
