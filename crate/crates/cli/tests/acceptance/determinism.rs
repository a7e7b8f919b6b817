use std::path::Path;

use roadrough_cli::io;
use roadrough_cli::pipeline::{ModelBundle, Predictions, Selection};
use roadrough_models::Task;

use crate::{ensure, first_run, second_run, Outcome};

const PREDICTION_TOL: f64 = 1e-12;

fn bytes(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn check() -> Outcome {
    let (a, b) = (first_run()?, second_run()?);
    let report = bytes(&a.dir.path().join("report.json"))?;
    ensure(report == bytes(&b.dir.path().join("report.json"))?, || "report.json differs between seeded runs".into())?;

    let dir = a.dir.path();
    let table = io::read_features(&dir.join("features.csv")).map_err(|e| e.to_string())?;
    let sel: Selection = io::read_json(&dir.join("selection.json")).map_err(|e| e.to_string())?;
    let x = table.data.x.slice(ndarray::s![sel.test_rows(), ..]);
    let mut worst: f64 = 0.0;
    let mut bundles = 0;
    for e in &a.report.evaluation {
        let path = dir.join("models").join(ModelBundle::file_name(e.feature_set, e.task, e.family));
        let text = String::from_utf8(bytes(&path)?).map_err(|e| e.to_string())?;
        let bundle: ModelBundle = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        let reloaded: ModelBundle = serde_json::from_str(&serde_json::to_string(&bundle).unwrap()).map_err(|e| e.to_string())?;
        ensure(reloaded == bundle, || format!("{} changed on reload", path.display()))?;
        match (&e.predictions, bundle.task) {
            (Predictions::Values { predicted, .. }, Task::Regression) => {
                let (p, q) = (bundle.predict_values(x).unwrap(), reloaded.predict_values(x).unwrap());
                for ((p, q), stored) in p.iter().zip(&q).zip(predicted) {
                    worst = worst.max((p - q).abs()).max((p - stored).abs());
                }
            }
            (Predictions::Classes { predicted, .. }, Task::Classification) => {
                let (p, q) = (bundle.predict_levels(x).unwrap(), reloaded.predict_levels(x).unwrap());
                ensure(&p == predicted && p == q, || format!("{}: class predictions changed", path.display()))?;
            }
            _ => return Err(format!("{}: task does not match its evaluation", path.display())),
        }
        bundles += 1;
    }
    ensure(worst <= PREDICTION_TOL, || format!("reloaded predictions differ by {worst:e}"))?;
    Ok(format!("{} byte report identical across runs, {bundles} bundles reload with max deviation {worst:.1e}", report.len()))
}
