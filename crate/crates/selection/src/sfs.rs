//! Forward sequential feature selection scored by random-forest CV error.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;
use roadrough_core::metrics::rmse;
use roadrough_core::ordered_kfold;
use roadrough_models::forest::{resolve_max_features, ForestParams, RandomForest, Targets};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SelectionError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SfsConfig {
    pub k_folds: usize,
    /// Largest subset size tried.
    pub max_features: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for SfsConfig {
    fn default() -> Self {
        Self { k_folds: 5, max_features: 12, n_trees: 200, max_depth: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SfsResult {
    /// Feature indices in the order they were added.
    pub order: Vec<usize>,
    /// `cv_rmse[s]` scores the first `s + 1` features of `order`.
    pub cv_rmse: Vec<f64>,
    pub chosen: usize,
}

impl SfsResult {
    pub fn selected(&self) -> &[usize] {
        &self.order[..self.chosen]
    }
}

/// Mean validation RMSE of the scoring forest on `cols` over ordered folds.
pub fn subset_cv_rmse(x: ArrayView2<f64>, y: &[f64], cols: &[usize], cfg: &SfsConfig) -> Result<f64> {
    let sub = x.select(Axis(1), cols);
    let folds = ordered_kfold(y.len(), cfg.k_folds)?;
    let params = ForestParams {
        n_trees: cfg.n_trees,
        max_depth: cfg.max_depth,
        max_features: resolve_max_features(None, cols.len()),
        bootstrap: true,
        seed: cfg.seed,
    };
    let mut total = 0.0;
    for fold in &folds {
        let train = sub.slice(ndarray::s![fold.train.clone(), ..]);
        let forest = RandomForest::fit(train, Targets::Values(&y[fold.train.clone()]), &params)?;
        let pred = forest.predict_values(sub.slice(ndarray::s![fold.val.clone(), ..]))?;
        total += rmse(&y[fold.val.clone()], &pred)?;
    }
    Ok(total / folds.len() as f64)
}

/// Greedily add the feature that most lowers CV RMSE, up to
/// `cfg.max_features`; the chosen size is the best point on the curve (ties
/// go to the smaller subset, candidate ties to the lower index).
pub fn sfs_forward(x: ArrayView2<f64>, y: &[f64], cfg: &SfsConfig) -> Result<SfsResult> {
    if x.nrows() != y.len() {
        return Err(SelectionError::InvalidInput(format!("{} rows but {} targets", x.nrows(), y.len())));
    }
    if cfg.k_folds < 2 || cfg.max_features == 0 {
        return Err(SelectionError::InvalidInput(format!("SFS needs k_folds ≥ 2 and max_features ≥ 1, got {cfg:?}")));
    }
    let d = x.ncols();
    let steps = cfg.max_features.min(d);
    let mut order: Vec<usize> = Vec::with_capacity(steps);
    let mut curve = Vec::with_capacity(steps);
    for step in 0..steps {
        let candidates: Vec<usize> = (0..d).filter(|j| !order.contains(j)).collect();
        let scores: Vec<f64> = candidates
            .par_iter()
            .map(|&j| {
                let mut cols = order.clone();
                cols.push(j);
                subset_cv_rmse(x, y, &cols, cfg)
            })
            .collect::<Result<_>>()?;
        let best = (0..candidates.len()).fold(0, |b, i| if scores[i] < scores[b] { i } else { b });
        order.push(candidates[best]);
        curve.push(scores[best]);
        log::info!("SFS step {}: feature {} cv_rmse {:.5}", step + 1, candidates[best], scores[best]);
    }
    let chosen = 1 + (0..curve.len()).fold(0, |b, i| if curve[i] < curve[b] { i } else { b });
    Ok(SfsResult { order, cv_rmse: curve, chosen })
}
