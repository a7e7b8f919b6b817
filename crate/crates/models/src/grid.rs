//! Grid search over ordered cross-validation rounds.
//!
//! Each round fits its preprocessing (and, for classification, ADASYN) on the
//! round's training rows only, then scores every grid point on the following
//! validation block.

use std::ops::Range;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use roadrough_core::metrics::{classification_scores, rmse, Averaging};
use roadrough_core::{ordered_kfold, Hyperparams};
use serde::{Deserialize, Serialize};

use crate::adasyn::adasyn_resample;
use crate::error::{ModelError, Result};
use crate::family::{fit_model, Family, Model};
use crate::forest::Targets;

pub trait Transform: Send + Sync {
    fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>>;
}

/// A feature transformation fitted on training rows.
pub trait Preprocess: Sync {
    type Fitted: Transform;
    fn fit(&self, x: ArrayView2<f64>) -> Result<Self::Fitted>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Transform for Identity {
    fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(x.to_owned())
    }
}

impl Preprocess for Identity {
    type Fitted = Identity;
    fn fit(&self, _: ArrayView2<f64>) -> Result<Identity> {
        Ok(Identity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub seed: u64,
    /// Same-class neighbours for ADASYN; `None` disables oversampling.
    pub adasyn_k: Option<usize>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { seed: 0, adasyn_k: Some(crate::adasyn::DEFAULT_K) }
    }
}

/// Rows a round's fits were given, and the rows it was validated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAudit {
    pub round: usize,
    pub observed: Vec<usize>,
    pub validated: Range<usize>,
}

impl RoundAudit {
    pub fn is_clean(&self) -> bool {
        self.observed.iter().all(|i| !self.validated.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub family: Family,
    pub points: Vec<Hyperparams>,
    /// Per grid point, per round; `None` where the fit failed.
    pub scores: Vec<Vec<Option<f64>>>,
    pub mean: Vec<Option<f64>>,
    pub failed: Vec<(usize, String)>,
    pub best: usize,
    pub audit: Vec<RoundAudit>,
}

impl GridResult {
    pub fn best_params(&self) -> &Hyperparams {
        &self.points[self.best]
    }
}

/// Root mean squared error for values, macro-F1 for classes.
pub fn score(model: &Model, x: ArrayView2<f64>, targets: Targets) -> Result<f64> {
    Ok(match targets {
        Targets::Values(y) => rmse(y, &model.predict_values(x)?)?,
        Targets::Classes { labels, n_classes } => {
            classification_scores(labels, &model.predict_classes(x)?, n_classes, Averaging::Macro)?.f1
        }
    })
}

fn higher_is_better(targets: &Targets) -> bool {
    matches!(targets, Targets::Classes { .. })
}

/// Training rows after preprocessing and optional oversampling.
pub struct Prepared<F> {
    pub transform: F,
    pub x: Array2<f64>,
    pub labels: Option<Vec<usize>>,
}

impl<F> Prepared<F> {
    pub fn targets<'a>(&'a self, original: Targets<'a>) -> Targets<'a> {
        match (original, &self.labels) {
            (Targets::Classes { n_classes, .. }, Some(labels)) => Targets::Classes { labels, n_classes },
            (t, _) => t,
        }
    }
}

/// Fit the preprocessing on `x`, transform it, and oversample classes.
pub fn prepare<P: Preprocess>(prep: &P, x: ArrayView2<f64>, targets: Targets, opts: &FitOptions, salt: u64) -> Result<Prepared<P::Fitted>> {
    let transform = prep.fit(x)?;
    let xt = transform.transform(x)?;
    if let (Targets::Classes { labels, n_classes }, Some(k)) = (targets, opts.adasyn_k) {
        let s = adasyn_resample(xt.view(), labels, n_classes, k, opts.seed.wrapping_add(salt))?;
        return Ok(Prepared { transform, x: s.x, labels: Some(s.labels) });
    }
    Ok(Prepared { transform, x: xt, labels: None })
}

/// A round's prepared training rows and transformed validation rows.
type RoundData<F> = (Prepared<F>, Array2<f64>);

fn subset<'a>(targets: Targets<'a>, rows: Range<usize>) -> Targets<'a> {
    match targets {
        Targets::Values(y) => Targets::Values(&y[rows]),
        Targets::Classes { labels, n_classes } => Targets::Classes { labels: &labels[rows], n_classes },
    }
}

/// Score every grid point over `k_folds − 1` ordered rounds and pick the best
/// mean; ties go to the earlier point.
pub fn grid_search<P: Preprocess>(
    family: Family,
    grid: &[Hyperparams],
    x: ArrayView2<f64>,
    targets: Targets,
    k_folds: usize,
    prep: &P,
    opts: &FitOptions,
) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(ModelError::InvalidInput(format!("empty grid for {family}")));
    }
    let folds = ordered_kfold(x.nrows(), k_folds)?;
    let mut audit = Vec::with_capacity(folds.len());
    let mut rounds = Vec::with_capacity(folds.len());
    for (r, fold) in folds.iter().enumerate() {
        let observed = fold.train_indices();
        let x_train = x.select(Axis(0), &observed);
        audit.push(RoundAudit { round: r, observed, validated: fold.val.clone() });
        rounds.push((x_train, fold.clone()));
    }
    let prepared: Vec<Result<RoundData<P::Fitted>>> = rounds
        .par_iter()
        .enumerate()
        .map(|(r, (x_train, fold))| {
            let p = prepare(prep, x_train.view(), subset(targets, fold.train.clone()), opts, r as u64)?;
            let x_val = p.transform.transform(x.slice(ndarray::s![fold.val.clone(), ..]))?;
            Ok((p, x_val))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..folds.len()).map(move |r| (g, r))).collect();
    let outcomes: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(g, r)| {
            let (p, x_val) = prepared[r].as_ref().map_err(|e| ModelError::Preprocess(e.to_string()))?;
            let fold = &folds[r];
            let model = fit_model(family, p.x.view(), p.targets(subset(targets, fold.train.clone())), &grid[g], opts.seed)?;
            let s = score(&model, x_val.view(), subset(targets, fold.val.clone()))?;
            if s.is_finite() {
                Ok(s)
            } else {
                Err(ModelError::Diverged(s))
            }
        })
        .collect();

    let mut scores = vec![vec![None; folds.len()]; grid.len()];
    let mut failed = Vec::new();
    for (&(g, r), out) in jobs.iter().zip(outcomes) {
        match out {
            Ok(s) => scores[g][r] = Some(s),
            Err(e) => {
                if failed.last().is_none_or(|(last, _)| *last != g) {
                    log::warn!("{family} grid point {} failed: {e}", grid[g]);
                    failed.push((g, e.to_string()));
                }
            }
        }
    }
    let mean: Vec<Option<f64>> = scores
        .iter()
        .map(|row| {
            let vals: Option<Vec<f64>> = row.iter().copied().collect();
            vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect();
    let better = |a: f64, b: f64| if higher_is_better(&targets) { a > b } else { a < b };
    let mut best: Option<usize> = None;
    for (g, m) in mean.iter().enumerate() {
        if let Some(m) = m {
            if best.is_none_or(|b| better(*m, mean[b].expect("scored"))) {
                best = Some(g);
            }
        }
    }
    let Some(best) = best else {
        let first = failed.first().map(|(_, e)| e.clone()).unwrap_or_default();
        return Err(ModelError::AllGridPointsFailed(first));
    };
    Ok(GridResult { family, points: grid.to_vec(), scores, mean, failed, best, audit })
}
