use roadrough_cli::pipeline::TestMetrics;
use roadrough_cli::FeatureSet;
use roadrough_core::split::split_point;
use roadrough_models::{Family, Task};

use crate::{ensure, first_run, Outcome};

const MIN_WINDOWS: usize = 4000;
const TRAIN_FRAC: f64 = 0.8;
const MIN_R2: f64 = 0.60;
const MIN_BEST_F1: f64 = 0.55;
const MAX_BASELINE_F1: f64 = 0.35;
const MIN_ADJACENT_SHARE: f64 = 0.90;
const MAX_SECONDS: f64 = 900.0;

pub fn check() -> Outcome {
    let run = first_run()?;
    let r = &run.report;
    let secs = run.elapsed.as_secs_f64();
    ensure(secs < MAX_SECONDS, || format!("full run took {secs:.0} s"))?;

    let rows = r.features.as_ref().ok_or("no feature summary")?.rows;
    ensure(rows >= MIN_WINDOWS, || format!("{rows} windows"))?;
    let sel = r.selection.as_ref().ok_or("no selection summary")?;
    let cut = split_point(rows, TRAIN_FRAC).map_err(|e| e.to_string())?;
    ensure(sel.train_rows == cut, || format!("train rows {} vs ordered split {cut}", sel.train_rows))?;

    let r2 = |set, family| match r.eval(set, Task::Regression, family).map(|e| &e.metrics) {
        Some(TestMetrics::Regression(m)) => Ok(m.r2),
        _ => Err(format!("no {set} regression result for {family}")),
    };
    let f1 = |set, family| match r.eval(set, Task::Classification, family).map(|e| &e.metrics) {
        Some(TestMetrics::Classification { f1, adjacent_error_share, .. }) => Ok((*f1, *adjacent_error_share)),
        _ => Err(format!("no {set} classification result for {family}")),
    };

    let mut summary = Vec::new();
    let mut best: Option<(f64, FeatureSet, Family, Option<f64>)> = None;
    for set in [FeatureSet::Sfs, FeatureSet::Pca] {
        let baseline = r2(set, Family::Baseline)?;
        for family in Family::for_task(Task::Regression).into_iter().filter(|&f| f != Family::Baseline) {
            let v = r2(set, family)?;
            ensure(v > baseline, || format!("{set} {family} R² {v:.4} does not beat baseline {baseline:.4}"))?;
        }
        let (mlp, svr) = (r2(set, Family::Mlp)?, r2(set, Family::Svm)?);
        ensure(mlp >= MIN_R2 && svr >= MIN_R2, || format!("{set} R² MLP {mlp:.4} SVR {svr:.4}"))?;

        let (base_f1, _) = f1(set, Family::Baseline)?;
        ensure(base_f1 <= MAX_BASELINE_F1, || format!("{set} baseline macro-F1 {base_f1:.4}"))?;
        for family in Family::for_task(Task::Classification).into_iter().filter(|&f| f != Family::Baseline) {
            let (v, adjacent) = f1(set, family)?;
            if best.is_none_or(|b| v > b.0) {
                best = Some((v, set, family, adjacent));
            }
        }
        summary.push(format!("{set}: R² MLP {mlp:.3} SVR {svr:.3} baseline {baseline:.3}, baseline F1 {base_f1:.3}"));
    }
    let (best_f1, set, family, adjacent) = best.ok_or("no classifiers evaluated")?;
    ensure(best_f1 >= MIN_BEST_F1, || format!("best macro-F1 {best_f1:.4} ({set} {family})"))?;
    let adjacent = adjacent.unwrap_or(1.0);
    ensure(adjacent >= MIN_ADJACENT_SHARE, || format!("{set} {family}: adjacent share {adjacent:.3}"))?;

    Ok(format!(
        "{rows} windows, {}; best F1 {best_f1:.3} ({set} {family}) with {:.0}% adjacent errors; {secs:.0} s",
        summary.join("; "),
        100.0 * adjacent
    ))
}
