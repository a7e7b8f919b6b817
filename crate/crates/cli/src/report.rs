//! Tables and figure data written from a finished run.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use roadrough_core::IriLevel;
use roadrough_models::Task;
use serde::{Deserialize, Serialize};

use crate::io::{fmt_f64, write_json, write_text};
use crate::pipeline::{Predictions, RunReport, TestMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Serialize)]
struct JsonTable<'a> {
    header: &'a [String],
    rows: &'a [Vec<String>],
}

fn tables(report: &RunReport) -> Vec<Table> {
    let mut regression = Table::new("regression_metrics", &["feature_set", "family", "r2", "mae", "rmse", "mre"]);
    let mut classification = Table::new("classification_metrics", &["feature_set", "family", "precision", "recall", "f1"]);
    let mut out = Vec::new();
    for e in &report.evaluation {
        let (set, fam) = (e.feature_set.to_string(), e.family.to_string());
        match &e.metrics {
            TestMetrics::Regression(m) => {
                regression.rows.push(vec![set.clone(), fam.clone(), fmt_f64(m.r2), fmt_f64(m.mae), fmt_f64(m.rmse), fmt_f64(m.mre)])
            }
            TestMetrics::Classification { precision, recall, f1, confusion, .. } => {
                classification.rows.push(vec![set.clone(), fam.clone(), fmt_f64(*precision), fmt_f64(*recall), fmt_f64(*f1)]);
                let mut grid = Table::new(format!("confusion_{set}_{fam}"), &["true"]);
                grid.header.extend(IriLevel::ALL.iter().map(|l| l.name().to_string()));
                for (level, row) in IriLevel::ALL.iter().zip(confusion) {
                    let mut r = vec![level.name().to_string()];
                    r.extend(row.iter().map(usize::to_string));
                    grid.rows.push(r);
                }
                out.push(grid);
            }
        }
        if let Predictions::Values { actual, predicted } = &e.predictions {
            let mut t = Table::new(format!("predictions_{set}_{fam}"), &["window_id", "actual", "predicted"]);
            for ((id, a), p) in e.window_ids.iter().zip(actual).zip(predicted) {
                t.rows.push(vec![id.to_string(), fmt_f64(*a), fmt_f64(*p)]);
            }
            out.push(t);
        }
    }
    if let Some(sel) = &report.selection {
        let mut t = Table::new("sfs_curve", &["n_features", "added", "cv_rmse"]);
        for (i, (&j, &score)) in sel.sfs.order.iter().zip(&sel.sfs.cv_rmse).enumerate() {
            t.rows.push(vec![(i + 1).to_string(), j.to_string(), fmt_f64(score)]);
        }
        out.push(t);
    }
    let mut cv = Table::new("cv_scores", &["feature_set", "task", "family", "grid_point", "hyperparams", "mean", "best"]);
    for r in &report.training {
        let task = if r.task == Task::Regression { "regression" } else { "classification" };
        for (g, (hp, m)) in r.grid.iter().zip(&r.cv_mean).enumerate() {
            cv.rows.push(vec![
                r.feature_set.to_string(),
                task.into(),
                r.family.to_string(),
                g.to_string(),
                format!("\"{}\"", hp.to_string().replace('"', "\"\"")),
                m.map_or(String::new(), fmt_f64),
                (g == r.best).to_string(),
            ]);
        }
    }
    out.insert(0, cv);
    out.insert(0, classification);
    out.insert(0, regression);
    out
}

/// Write the metrics tables, confusion grids, prediction pairs and SFS curve
/// into `dir`; returns the files written.
pub fn export_report(report: &RunReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for t in tables(report) {
        for f in formats {
            let path = match f {
                ReportFormat::Csv => {
                    let p = dir.join(format!("{}.csv", t.name));
                    let header: Vec<&str> = t.header.iter().map(String::as_str).collect();
                    write_text(&p, &csv(&header, &t.rows))?;
                    p
                }
                ReportFormat::Json => {
                    let p = dir.join(format!("{}.json", t.name));
                    write_json(&p, &JsonTable { header: &t.header, rows: &t.rows })?;
                    p
                }
            };
            written.push(path);
        }
    }
    Ok(written)
}
