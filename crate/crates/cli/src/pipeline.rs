//! Stage orchestration: simulate → match → align → featurize → select →
//! train → evaluate, each reading its inputs from disk and persisting its
//! outputs before the next one starts.

use std::ops::Range;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use ndarray::{s, ArrayView2, Axis};
use roadrough_core::metrics::{classification_metrics, confusion_matrix, regression_metrics, RegressionMetrics};
use roadrough_core::split::split_point;
use roadrough_core::{Hyperparams, IriLevel};
use roadrough_features::{build_feature_matrix, resample_segment};
use roadrough_geoalign::{align_segments, interpolate_positions, map_match, sliding_windows, AlignReport, MatchedTrace, WindowReport};
use roadrough_models::grid::{grid_search, prepare, FitOptions, Transform};
use roadrough_models::{fit_model, Family, Model, Targets, Task};
use roadrough_selection::constant::{distinct_columns, varying_columns};
use roadrough_selection::{pca_fit, sfs_forward, FeaturePipeline, FittedPipeline, SfsResult};
use roadrough_features::Standardizer;
use serde::{Deserialize, Serialize};

use crate::config::{FeatureSet, PipelineConfig, Stage};
use crate::io::{self, FeatureTable};
use crate::scenario::{self, ScenarioSummary};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {error:#}")]
pub struct PipelineError {
    pub stage: Stage,
    pub error: anyhow::Error,
}

/// Where each artifact lives.
pub struct Layout<'a> {
    cfg: &'a PipelineConfig,
}

impl<'a> Layout<'a> {
    pub fn new(cfg: &'a PipelineConfig) -> Self {
        Self { cfg }
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    fn input(&self, given: &Option<PathBuf>, name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out(name))
    }

    pub fn telemetry(&self) -> PathBuf {
        self.input(&self.cfg.inputs.telemetry, "telemetry.csv")
    }
    pub fn reference(&self) -> PathBuf {
        self.input(&self.cfg.inputs.reference, "reference.csv")
    }
    pub fn network(&self) -> PathBuf {
        self.input(&self.cfg.inputs.network, "network.txt")
    }
    pub fn matched(&self) -> PathBuf {
        self.input(&self.cfg.inputs.matched, "matched.json")
    }
    pub fn pieces(&self) -> PathBuf {
        self.input(&self.cfg.inputs.pieces, "pieces.csv")
    }
    pub fn features(&self) -> PathBuf {
        self.input(&self.cfg.inputs.features, "features.csv")
    }
    pub fn selection(&self) -> PathBuf {
        self.input(&self.cfg.inputs.selection, "selection.json")
    }
    pub fn models(&self) -> PathBuf {
        self.input(&self.cfg.inputs.models, "models")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub fixes: usize,
    pub path_edges: usize,
    pub path_length_m: f64,
    pub log_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub windows: WindowReport,
    pub rows: usize,
    pub columns: usize,
}

/// Train/test split and the chosen columns, all fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub rows: usize,
    pub train_rows: usize,
    /// Columns that vary over the training rows.
    pub varying: Vec<usize>,
    /// Varying columns that are not affine copies of an earlier one; the
    /// SFS candidates.
    pub distinct: Vec<usize>,
    /// Curve over column indices of the full feature table.
    pub sfs: SfsResult,
    pub selected_names: Vec<String>,
    pub pca_components: usize,
    pub pca_kept_ratio: f64,
}

impl Selection {
    pub fn selected(&self) -> &[usize] {
        self.sfs.selected()
    }

    pub fn test_rows(&self) -> Range<usize> {
        self.train_rows..self.rows
    }
}

/// Everything needed to score new feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub schema_version: u32,
    /// Columns of the feature table the bundle expects.
    pub feature_names: Vec<String>,
    /// Indices of the columns fed to the model.
    pub selected: Vec<usize>,
    pub feature_set: FeatureSet,
    pub task: Task,
    pub family: Family,
    pub hyperparams: Hyperparams,
    pub preprocess: FittedPipeline,
    pub model: Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predictions {
    Values { actual: Vec<f64>, predicted: Vec<f64> },
    Classes { actual: Vec<IriLevel>, predicted: Vec<IriLevel> },
}

impl ModelBundle {
    pub fn file_name(set: FeatureSet, task: Task, family: Family) -> String {
        let task = match task {
            Task::Regression => "regression",
            Task::Classification => "classification",
        };
        format!("{set}-{task}-{family}.json")
    }

    /// Predict from rows holding every column in `feature_names`.
    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self.model.predict_values(self.inputs(x)?.view())?)
    }

    pub fn predict_levels(&self, x: ArrayView2<f64>) -> Result<Vec<IriLevel>> {
        let classes = self.model.predict_classes(self.inputs(x)?.view())?;
        classes
            .into_iter()
            .map(|c| IriLevel::from_index(c).with_context(|| format!("class index {c} out of range")))
            .collect()
    }

    fn inputs(&self, x: ArrayView2<f64>) -> Result<ndarray::Array2<f64>> {
        ensure!(
            x.ncols() == self.feature_names.len(),
            "{} columns given, bundle expects {}",
            x.ncols(),
            self.feature_names.len()
        );
        Ok(self.preprocess.transform(x.select(Axis(1), &self.selected).view())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: usize,
    pub observed_rows: usize,
    pub observed_max: usize,
    pub validated: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub feature_set: FeatureSet,
    pub task: Task,
    pub family: Family,
    pub bundle: String,
    pub grid: Vec<Hyperparams>,
    /// Grid point × round validation scores (RMSE or macro-F1).
    pub cv_scores: Vec<Vec<Option<f64>>>,
    pub cv_mean: Vec<Option<f64>>,
    pub failed: Vec<(usize, String)>,
    pub best: usize,
    pub rounds: Vec<RoundSummary>,
    /// No fit saw a row at or after the block it was scored on.
    pub leakage_free: bool,
    pub fitted_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestMetrics {
    Regression(RegressionMetrics),
    Classification {
        precision: f64,
        recall: f64,
        f1: f64,
        /// Rows are true levels, columns predicted levels.
        confusion: Vec<Vec<usize>>,
        /// Share of misclassifications landing in a neighbouring level.
        adjacent_error_share: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub feature_set: FeatureSet,
    pub task: Task,
    pub family: Family,
    pub window_ids: Vec<usize>,
    pub metrics: TestMetrics,
    pub predictions: Predictions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: Option<u64>,
    pub scenario: Option<ScenarioSummary>,
    pub matching: Option<MatchSummary>,
    pub alignment: Option<AlignReport>,
    pub features: Option<FeatureSummary>,
    pub selection: Option<Selection>,
    pub training: Vec<TrainRecord>,
    pub evaluation: Vec<EvalRecord>,
}

impl RunReport {
    pub fn eval(&self, set: FeatureSet, task: Task, family: Family) -> Option<&EvalRecord> {
        self.evaluation.iter().find(|e| e.feature_set == set && e.task == task && e.family == family)
    }
}

/// Metrics of a prediction set, as stored in reports.
pub fn test_metrics(predictions: &Predictions) -> Result<TestMetrics> {
    Ok(match predictions {
        Predictions::Values { actual, predicted } => TestMetrics::Regression(regression_metrics(actual, predicted)?),
        Predictions::Classes { actual, predicted } => {
            let m = classification_metrics(actual, predicted)?;
            let confusion = confusion_matrix(actual, predicted)?;
            let wrong = actual.iter().zip(predicted).filter(|(a, p)| a != p).count();
            let adjacent = actual.iter().zip(predicted).filter(|(a, p)| a.index().abs_diff(p.index()) == 1).count();
            TestMetrics::Classification {
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                confusion,
                adjacent_error_share: (wrong > 0).then(|| adjacent as f64 / wrong as f64),
            }
        }
    })
}

fn stage_seed(cfg: &PipelineConfig, stage: Stage) -> u64 {
    cfg.seed().wrapping_add(1000 * stage as u64)
}

fn simulate(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let sc = scenario::simulate(&cfg.scenario, stage_seed(cfg, Stage::Simulate))?;
    io::write_network(&l.out("network.txt"), &sc.network)?;
    io::write_reference(&l.out("reference.csv"), &sc.reference)?;
    io::write_telemetry(&l.out("telemetry.csv"), &sc.telemetry)?;
    io::write_json(&l.out("scenario.json"), &sc.summary)?;
    log::info!(
        "simulated {:.0} m: {} samples, {} fixes, {} reference segments",
        sc.summary.route_length_m,
        sc.summary.samples,
        sc.summary.fixes,
        sc.summary.reference_segments
    );
    Ok(())
}

fn match_stage(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let (net_path, tel_path) = (l.network(), l.telemetry());
    io::require(&net_path)?;
    io::require(&tel_path)?;
    let net = io::read_network(&net_path)?;
    let trace = io::read_telemetry(&tel_path)?;
    let fixes: Vec<_> = trace.fixes().into_iter().map(|(_, t, p)| (t, p)).collect();
    let matched = map_match(&fixes, &net, &cfg.matching)?;
    io::write_json(&l.out("matched.json"), &matched)?;
    let summary = MatchSummary {
        fixes: matched.fixes.len(),
        path_edges: matched.edge_path.len(),
        path_length_m: matched.path.length(),
        log_score: matched.log_score,
    };
    io::write_json(&l.out("matching.json"), &summary)?;
    log::info!("matched {} fixes onto {} edges", summary.fixes, summary.path_edges);
    Ok(())
}

fn align(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let (tel_path, ref_path, matched_path) = (l.telemetry(), l.reference(), l.matched());
    for p in [&tel_path, &ref_path, &matched_path] {
        io::require(p)?;
    }
    let trace = io::read_telemetry(&tel_path)?;
    let reference = io::read_reference(&ref_path)?;
    let matched: MatchedTrace = io::read_json(&matched_path)?;
    let positions = interpolate_positions(&trace, &matched)?;
    let alignment = align_segments(&reference, &positions, &trace, &cfg.align)?;
    io::write_pieces(&l.out("pieces.csv"), &alignment.pieces)?;
    io::write_json(&l.out("alignment.json"), &alignment.report)?;
    let r = &alignment.report;
    log::info!(
        "aligned {}/{} segments ({} without nearby samples, {} too short, {} samples unplaced)",
        r.retained,
        r.segments,
        r.no_nearby_samples,
        r.too_few_samples,
        r.unplaced_samples
    );
    Ok(())
}

fn featurize(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let (tel_path, ref_path, pieces_path) = (l.telemetry(), l.reference(), l.pieces());
    for p in [&tel_path, &ref_path, &pieces_path] {
        io::require(p)?;
    }
    let trace = io::read_telemetry(&tel_path)?;
    let reference = io::read_reference(&ref_path)?;
    let pieces = io::read_pieces(&pieces_path, &trace, &reference)?;
    let (windows, report) = sliding_windows(&pieces)?;
    ensure!(!windows.is_empty(), "no complete windows");
    let resampled = windows
        .iter()
        .map(|w| resample_segment(w, cfg.features.resample_len))
        .collect::<roadrough_features::Result<Vec<_>>>()?;
    let data = build_feature_matrix(&resampled)?;
    let table = FeatureTable { window_ids: windows.iter().map(|w| w.window_id).collect(), data };
    io::write_features(&l.out("features.csv"), &table)?;
    let summary = FeatureSummary { windows: report, rows: table.data.n_rows(), columns: table.data.n_features() };
    io::write_json(&l.out("featurize.json"), &summary)?;
    log::info!("{} windows ({} skipped), {} features", report.windows, report.skipped, summary.columns);
    Ok(())
}

fn select(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let path = l.features();
    io::require(&path)?;
    let table = io::read_features(&path)?;
    let d = &table.data;
    let n_train = split_point(d.n_rows(), cfg.selection.train_frac)?;
    let x_train = d.x.slice(s![..n_train, ..]);
    let y_train = &d.y[..n_train];
    let varying = varying_columns(x_train)?;
    let distinct = distinct_columns(x_train, &varying);
    let mut sfs_cfg = cfg.selection.sfs;
    sfs_cfg.seed = stage_seed(cfg, Stage::Select);
    let started = Instant::now();
    let local = sfs_forward(x_train.select(Axis(1), &distinct).view(), y_train, &sfs_cfg)?;
    let sfs = SfsResult { order: local.order.iter().map(|&j| distinct[j]).collect(), ..local };
    let chosen = x_train.select(Axis(1), sfs.selected());
    let pca = pca_fit(Standardizer::fit(&chosen)?.apply(&chosen)?.view(), cfg.selection.pca_target)?;
    let selection = Selection {
        rows: d.n_rows(),
        train_rows: n_train,
        selected_names: sfs.selected().iter().map(|&j| d.feature_names[j].clone()).collect(),
        varying,
        distinct,
        sfs,
        pca_components: pca.n_components(),
        pca_kept_ratio: pca.kept_ratio(),
    };
    io::write_json(&l.out("selection.json"), &selection)?;
    log::info!(
        "selected {} features in {:.1} s ({} PCA components keep {:.4} of the variance): {}",
        selection.selected().len(),
        started.elapsed().as_secs_f64(),
        selection.pca_components,
        selection.pca_kept_ratio,
        selection.selected_names.join(", ")
    );
    Ok(())
}

fn load_split(l: &Layout) -> Result<(FeatureTable, Selection)> {
    let (fpath, spath) = (l.features(), l.selection());
    io::require(&fpath)?;
    io::require(&spath)?;
    let table = io::read_features(&fpath)?;
    let sel: Selection = io::read_json(&spath)?;
    ensure!(
        sel.rows == table.data.n_rows(),
        "{} was made for {} rows but {} has {}",
        spath.display(),
        sel.rows,
        fpath.display(),
        table.data.n_rows()
    );
    ensure!(sel.selected().iter().all(|&j| j < table.data.n_features()), "selection refers to missing columns");
    Ok((table, sel))
}

fn train(cfg: &PipelineConfig, l: &Layout) -> Result<()> {
    let (table, sel) = load_split(l)?;
    let d = &table.data;
    let n_train = sel.train_rows;
    let x_train = d.x.slice(s![..n_train, ..]).select(Axis(1), sel.selected());
    let labels = d.class_indices();
    let seed = stage_seed(cfg, Stage::Train);
    let tr = &cfg.training;
    let models_dir = l.out("models");
    std::fs::create_dir_all(&models_dir).with_context(|| format!("creating {}", models_dir.display()))?;
    let mut records = Vec::new();
    for &set in &tr.feature_sets {
        let prep = FeaturePipeline { pca_target: (set == FeatureSet::Pca).then_some(cfg.selection.pca_target) };
        for &task in &tr.tasks {
            let targets = match task {
                Task::Regression => Targets::Values(&d.y[..n_train]),
                Task::Classification => Targets::Classes { labels: &labels[..n_train], n_classes: IriLevel::COUNT },
            };
            for family in tr.families_for(task) {
                // the baseline must see the real class frequencies
                let oversample = task == Task::Classification && family != Family::Baseline;
                let opts = FitOptions { seed, adasyn_k: if oversample { tr.adasyn_k } else { None } };
                let started = Instant::now();
                let grid = tr.grid(family);
                let res = grid_search(family, &grid, x_train.view(), targets, tr.k_folds, &prep, &opts)
                    .with_context(|| format!("grid search for {family} on {set}"))?;
                // the final fit resamples with a salt no CV round uses
                let p = prepare(&prep, x_train.view(), targets, &opts, tr.k_folds as u64)?;
                let model = fit_model(family, p.x.view(), p.targets(targets), res.best_params(), seed)
                    .with_context(|| format!("final fit of {family} on {set}"))?;
                let bundle = ModelBundle {
                    schema_version: SCHEMA_VERSION,
                    feature_names: d.feature_names.clone(),
                    selected: sel.selected().to_vec(),
                    feature_set: set,
                    task,
                    family,
                    hyperparams: res.best_params().clone(),
                    preprocess: p.transform,
                    model,
                };
                let name = ModelBundle::file_name(set, task, family);
                io::write_json(&models_dir.join(&name), &bundle)?;
                let rounds: Vec<RoundSummary> = res
                    .audit
                    .iter()
                    .map(|a| RoundSummary {
                        round: a.round,
                        observed_rows: a.observed.len(),
                        observed_max: a.observed.iter().copied().max().unwrap_or(0),
                        validated: a.validated.clone(),
                    })
                    .collect();
                log::info!(
                    "{set}/{task:?}/{family}: best {} (cv {:.4}) in {:.1} s",
                    res.best_params(),
                    res.mean[res.best].unwrap_or(f64::NAN),
                    started.elapsed().as_secs_f64()
                );
                records.push(TrainRecord {
                    feature_set: set,
                    task,
                    family,
                    bundle: name,
                    leakage_free: res.audit.iter().all(|a| a.is_clean()),
                    grid: res.points,
                    cv_scores: res.scores,
                    cv_mean: res.mean,
                    failed: res.failed,
                    best: res.best,
                    rounds,
                    fitted_rows: p.x.nrows(),
                });
            }
        }
    }
    io::write_json(&l.out("training.json"), &records)?;
    Ok(())
}

fn bundle_paths(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        bail!("missing model directory {}", dir.display());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    ensure!(!paths.is_empty(), "no model bundles in {}", dir.display());
    Ok(paths)
}

pub fn evaluate_bundle(bundle: &ModelBundle, table: &FeatureTable, rows: Range<usize>) -> Result<EvalRecord> {
    let d = &table.data;
    ensure!(bundle.schema_version == SCHEMA_VERSION, "unsupported bundle schema {}", bundle.schema_version);
    ensure!(bundle.feature_names == d.feature_names, "bundle feature names differ from the feature table");
    let x = d.x.slice(s![rows.clone(), ..]);
    let predictions = match bundle.task {
        Task::Regression => Predictions::Values { actual: d.y[rows.clone()].to_vec(), predicted: bundle.predict_values(x)? },
        Task::Classification => {
            Predictions::Classes { actual: d.level[rows.clone()].to_vec(), predicted: bundle.predict_levels(x)? }
        }
    };
    Ok(EvalRecord {
        feature_set: bundle.feature_set,
        task: bundle.task,
        family: bundle.family,
        window_ids: table.window_ids[rows].to_vec(),
        metrics: test_metrics(&predictions)?,
        predictions,
    })
}

fn evaluate(l: &Layout) -> Result<()> {
    let (table, sel) = load_split(l)?;
    let mut records = Vec::new();
    for path in bundle_paths(&l.models())? {
        let bundle: ModelBundle = io::read_json(&path)?;
        let rec = evaluate_bundle(&bundle, &table, sel.test_rows()).with_context(|| format!("evaluating {}", path.display()))?;
        match &rec.metrics {
            TestMetrics::Regression(m) => log::info!("{}/{}: R² {:.4}, RMSE {:.4}", rec.feature_set, rec.family, m.r2, m.rmse),
            TestMetrics::Classification { f1, .. } => log::info!("{}/{}: macro-F1 {:.4}", rec.feature_set, rec.family, f1),
        }
        records.push(rec);
    }
    io::write_json(&l.out("evaluation.json"), &records)?;
    Ok(())
}

fn optional<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>> {
    if path.is_file() {
        io::read_json(path).map(Some)
    } else {
        Ok(None)
    }
}

/// Gather the persisted stage outputs into one report.
pub fn assemble_report(cfg: &PipelineConfig) -> Result<RunReport> {
    let l = Layout::new(cfg);
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        seed: cfg.seed,
        scenario: optional(&l.out("scenario.json"))?,
        matching: optional(&l.out("matching.json"))?,
        alignment: optional(&l.out("alignment.json"))?,
        features: optional(&l.out("featurize.json"))?,
        selection: optional(&l.selection())?,
        training: optional(&l.out("training.json"))?.unwrap_or_default(),
        evaluation: optional(&l.out("evaluation.json"))?.unwrap_or_default(),
    })
}

pub fn run_stage(cfg: &PipelineConfig, stage: Stage) -> Result<(), PipelineError> {
    let l = Layout::new(cfg);
    let started = Instant::now();
    let out = match stage {
        Stage::Simulate => simulate(cfg, &l),
        Stage::Match => match_stage(cfg, &l),
        Stage::Align => align(cfg, &l),
        Stage::Featurize => featurize(cfg, &l),
        Stage::Select => select(cfg, &l),
        Stage::Train => train(cfg, &l),
        Stage::Evaluate => evaluate(&l),
    };
    log::info!("{stage} finished in {:.1} s", started.elapsed().as_secs_f64());
    out.map_err(|error| PipelineError { stage, error })
}

/// Run the enabled stages in order, then write `report.json`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let first = Stage::ORDER.into_iter().find(|&s| cfg.stages.enabled(s)).unwrap_or(Stage::Evaluate);
    cfg.validate().map_err(|error| PipelineError { stage: first, error })?;
    for stage in Stage::ORDER {
        if cfg.stages.enabled(stage) {
            run_stage(cfg, stage)?;
        }
    }
    let last = Stage::ORDER.into_iter().rev().find(|&s| cfg.stages.enabled(s)).unwrap_or(Stage::Evaluate);
    let report = assemble_report(cfg).map_err(|error| PipelineError { stage: last, error })?;
    io::write_json(&cfg.out_dir.join("report.json"), &report).map_err(|error| PipelineError { stage: last, error })?;
    Ok(report)
}
