use std::sync::Mutex;

use ndarray::{Array2, ArrayView2};
use roadrough_cli::io;
use roadrough_core::{ordered_kfold, IriLevel};
use roadrough_models::adasyn::adasyn_resample;
use roadrough_models::grid::{grid_search, FitOptions, Preprocess, Transform};
use roadrough_models::{Family, Targets, Task};

use crate::oracle::{gaussian_matrix, rng};
use crate::{ensure, first_run, Outcome};

const MAX_IMBALANCE: f64 = 1.1;

fn kfold_sweep() -> Result<usize, String> {
    let mut cases = 0;
    for k in 2..=10 {
        for n in k..=200 {
            let folds = ordered_kfold(n, k).map_err(|e| e.to_string())?;
            ensure(folds.len() == k - 1, || format!("n {n} k {k}: {} rounds", folds.len()))?;
            for f in &folds {
                let (train, val) = (f.train_indices(), f.val_indices());
                ensure(!train.is_empty() && !val.is_empty(), || format!("n {n} k {k}: empty fold"))?;
                let last_train = *train.iter().max().unwrap();
                ensure(val.iter().all(|&v| v > last_train), || format!("n {n} k {k}: validation precedes training"))?;
            }
            ensure(folds.last().unwrap().val.end == n, || format!("n {n} k {k}: last block not validated"))?;
            cases += 1;
        }
    }
    Ok(cases)
}

/// Identity transform that logs the row counts it sees.
struct Logged<'a>(&'a Mutex<Vec<(&'static str, usize)>>);

impl Transform for Logged<'_> {
    fn transform(&self, x: ArrayView2<f64>) -> roadrough_models::Result<Array2<f64>> {
        self.0.lock().unwrap().push(("transform", x.nrows()));
        Ok(x.to_owned())
    }
}

impl<'a> Preprocess for Logged<'a> {
    type Fitted = Logged<'a>;
    fn fit(&self, x: ArrayView2<f64>) -> roadrough_models::Result<Logged<'a>> {
        self.0.lock().unwrap().push(("fit", x.nrows()));
        Ok(Logged(self.0))
    }
}

/// Three classes in a 12:4:1 ratio, ordered as they would arrive on a road.
fn imbalanced(n: usize) -> (Array2<f64>, Vec<usize>) {
    let mut r = rng(31);
    let mut x = gaussian_matrix(&mut r, n, 3);
    let labels: Vec<usize> = (0..n).map(|i| [0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 2][i % 17]).collect();
    for (mut row, &l) in x.rows_mut().into_iter().zip(&labels) {
        row[0] += 1.5 * l as f64;
    }
    (x, labels)
}

fn adasyn_in_folds() -> Result<f64, String> {
    let (x, labels) = imbalanced(340);
    let mut worst: f64 = 0.0;
    for fold in ordered_kfold(labels.len(), 5).map_err(|e| e.to_string())? {
        let train = fold.train.clone();
        let s = adasyn_resample(x.slice(ndarray::s![train.clone(), ..]), &labels[train.clone()], 3, 5, 9).map_err(|e| e.to_string())?;
        let counts: Vec<usize> = (0..3).map(|c| s.labels.iter().filter(|&&l| l == c).count()).collect();
        let ratio = *counts.iter().max().unwrap() as f64 / *counts.iter().min().unwrap() as f64;
        ensure(ratio <= MAX_IMBALANCE, || format!("fold {:?}: class counts {counts:?}", fold.val))?;
        ensure(s.origin.iter().all(|&(i, j, _)| i < train.len() && j < train.len()), || "synthetic row built from outside the fold".into())?;
        worst = worst.max(ratio);
    }

    // validation blocks are transformed as they are, never resampled
    let log = Mutex::new(Vec::new());
    let grid = Family::Logistic.default_grid();
    let targets = Targets::Classes { labels: &labels, n_classes: 3 };
    let result = grid_search(Family::Logistic, &grid[..1], x.view(), targets, 5, &Logged(&log), &FitOptions { seed: 4, adasyn_k: Some(5) })
        .map_err(|e| e.to_string())?;
    let folds = ordered_kfold(labels.len(), 5).unwrap();
    let log = log.into_inner().unwrap();
    for (fold, a) in folds.iter().zip(&result.audit) {
        ensure(a.is_clean(), || format!("round {} observed validation rows", a.round))?;
        ensure(log.contains(&("fit", fold.train.len())), || format!("no fit on {} training rows", fold.train.len()))?;
        ensure(log.contains(&("transform", fold.val.len())), || format!("validation block of {} rows was altered", fold.val.len()))?;
    }
    let sizes: Vec<usize> = folds.iter().flat_map(|f| [f.train.len(), f.val.len()]).collect();
    ensure(log.iter().all(|(_, n)| sizes.contains(n)), || format!("unexpected row counts {log:?}"))?;
    Ok(worst)
}

fn pipeline_audit() -> Result<usize, String> {
    let run = first_run()?;
    let r = &run.report;
    let sel = r.selection.as_ref().ok_or("no selection summary")?;
    for t in &r.training {
        ensure(t.leakage_free, || format!("{} {:?} {} saw validation rows", t.feature_set, t.task, t.family))?;
        for round in &t.rounds {
            ensure(round.observed_max < round.validated.start, || format!("{} {}: round {} leaks", t.feature_set, t.family, round.round))?;
            ensure(round.validated.end <= sel.train_rows, || "validation block reaches into the test rows".into())?;
        }
        if t.task == Task::Regression || t.family == Family::Baseline {
            ensure(t.fitted_rows == sel.train_rows, || format!("{} {}: fitted {} rows", t.feature_set, t.family, t.fitted_rows))?;
        } else {
            ensure(t.fitted_rows >= sel.train_rows, || format!("{} {}: fitted {} rows", t.feature_set, t.family, t.fitted_rows))?;
        }
    }
    // test rows are evaluated untouched
    let table = io::read_features(&run.dir.path().join("features.csv")).map_err(|e| e.to_string())?;
    let test = sel.test_rows();
    let want_ids: Vec<usize> = table.window_ids[test.clone()].to_vec();
    let want_levels: Vec<IriLevel> = table.data.level[test].to_vec();
    for e in &r.evaluation {
        ensure(e.window_ids == want_ids, || format!("{} {}: evaluated on other windows", e.feature_set, e.family))?;
        if let roadrough_cli::pipeline::Predictions::Classes { actual, .. } = &e.predictions {
            ensure(actual == &want_levels, || format!("{} {}: test labels changed", e.feature_set, e.family))?;
        }
    }
    Ok(r.training.len())
}

pub fn check() -> Outcome {
    let cases = kfold_sweep()?;
    let imbalance = adasyn_in_folds()?;
    let audited = pipeline_audit()?;
    Ok(format!("{cases} (n, k) pairs ordered, worst in-fold imbalance {imbalance:.3}, {audited} trained models leakage free"))
}
