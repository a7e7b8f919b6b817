//! TOML pipeline configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use roadrough_core::Hyperparams;
use roadrough_geoalign::{AlignConfig, MatchParams};
use roadrough_models::{Family, Task};
use roadrough_selection::SfsConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Simulate,
    Match,
    Align,
    Featurize,
    Select,
    Train,
    Evaluate,
}

impl Stage {
    pub const ORDER: [Stage; 7] =
        [Stage::Simulate, Stage::Match, Stage::Align, Stage::Featurize, Stage::Select, Stage::Train, Stage::Evaluate];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Match => "match",
            Stage::Align => "align",
            Stage::Featurize => "featurize",
            Stage::Select => "select",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
        }
    }

    /// Stochastic stages need a seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Stage::Simulate | Stage::Select | Stage::Train)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// The SFS subset, standardized.
    Sfs,
    /// PCA scores of the standardized SFS subset.
    Pca,
}

impl FeatureSet {
    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Sfs => "sfs",
            FeatureSet::Pca => "pca",
        }
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stages {
    pub simulate: bool,
    #[serde(rename = "match")]
    pub match_: bool,
    pub align: bool,
    pub featurize: bool,
    pub select: bool,
    pub train: bool,
    pub evaluate: bool,
}

impl Default for Stages {
    fn default() -> Self {
        Self::all(true)
    }
}

impl Stages {
    pub fn all(on: bool) -> Self {
        Self { simulate: on, match_: on, align: on, featurize: on, select: on, train: on, evaluate: on }
    }

    pub fn only(stage: Stage) -> Self {
        let mut s = Self::all(false);
        *s.flag_mut(stage) = true;
        s
    }

    pub fn enabled(&self, stage: Stage) -> bool {
        match stage {
            Stage::Simulate => self.simulate,
            Stage::Match => self.match_,
            Stage::Align => self.align,
            Stage::Featurize => self.featurize,
            Stage::Select => self.select,
            Stage::Train => self.train,
            Stage::Evaluate => self.evaluate,
        }
    }

    fn flag_mut(&mut self, stage: Stage) -> &mut bool {
        match stage {
            Stage::Simulate => &mut self.simulate,
            Stage::Match => &mut self.match_,
            Stage::Align => &mut self.align,
            Stage::Featurize => &mut self.featurize,
            Stage::Select => &mut self.select,
            Stage::Train => &mut self.train,
            Stage::Evaluate => &mut self.evaluate,
        }
    }
}

/// Optional overrides for stage inputs. Unset paths resolve inside `out_dir`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub telemetry: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub matched: Option<PathBuf>,
    pub pieces: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub selection: Option<PathBuf>,
    pub models: Option<PathBuf>,
}

/// The synthetic survey: a corridor whose roughness changes section by
/// section, driven once by a perturbed quarter-car.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Route length, m.
    pub length_m: f64,
    pub node_spacing_m: f64,
    pub profile_dx_m: f64,
    pub section_min_m: f64,
    pub section_max_m: f64,
    /// Width of the roughness blend between sections, m.
    pub section_ramp_m: f64,
    /// Sections per shuffled block for the low, medium and high classes.
    pub class_mix: [usize; 3],
    /// Target IRI interval per class, m/km; drawn log-uniformly.
    pub class_iri: [[f64; 2]; 3],
    pub speed_min_ms: f64,
    pub speed_max_ms: f64,
    pub speed_knot_min_m: f64,
    pub speed_knot_max_m: f64,
    /// Correlation between the profile under the vehicle and the one the
    /// reference IRI is computed on.
    pub wheel_path_correlation: f64,
    /// Relative spread of the vehicle parameters around the Golden Car.
    pub vehicle_perturbation: f64,
    pub acc_rate_hz: f64,
    pub gps_rate_hz: f64,
    pub gps_noise_sigma_m: f64,
    pub acc_noise_sigma: f64,
    pub segment_length_m: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            origin_lat: 46.05,
            origin_lon: 14.5,
            length_m: 44_000.0,
            node_spacing_m: 100.0,
            profile_dx_m: 0.25,
            section_min_m: 300.0,
            section_max_m: 1500.0,
            section_ramp_m: 50.0,
            class_mix: [2, 2, 1],
            class_iri: [[0.4, 0.95], [0.85, 2.45], [2.55, 4.5]],
            speed_min_ms: 15.0,
            speed_max_ms: 30.0,
            speed_knot_min_m: 500.0,
            speed_knot_max_m: 2000.0,
            wheel_path_correlation: 0.8,
            vehicle_perturbation: 0.3,
            acc_rate_hz: 50.0,
            gps_rate_hz: 1.0,
            gps_noise_sigma_m: 3.0,
            acc_noise_sigma: 0.05,
            segment_length_m: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    /// Samples per window after resampling.
    pub resample_len: usize,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self { resample_len: roadrough_features::DEFAULT_TARGET_LEN }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSettings {
    pub sfs: SfsConfig,
    pub pca_target: f64,
    /// Leading share of windows used for training.
    pub train_frac: f64,
}

impl Default for SelectionSettings {
    fn default() -> Self {
        Self { sfs: SfsConfig { n_trees: 50, ..SfsConfig::default() }, pca_target: 0.99, train_frac: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSettings {
    pub k_folds: usize,
    /// Families to train; empty means every family supporting the task.
    pub families: Vec<Family>,
    pub tasks: Vec<Task>,
    pub feature_sets: Vec<FeatureSet>,
    /// ADASYN neighbours for classification folds; `None` disables oversampling.
    pub adasyn_k: Option<usize>,
    /// Grid overrides per family.
    pub grids: BTreeMap<Family, Vec<Hyperparams>>,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        Self {
            k_folds: 5,
            families: Vec::new(),
            tasks: vec![Task::Regression, Task::Classification],
            feature_sets: vec![FeatureSet::Sfs, FeatureSet::Pca],
            adasyn_k: Some(roadrough_models::adasyn::DEFAULT_K),
            grids: BTreeMap::new(),
        }
    }
}

impl TrainingSettings {
    pub fn families_for(&self, task: Task) -> Vec<Family> {
        if self.families.is_empty() {
            Family::for_task(task)
        } else {
            self.families.iter().copied().filter(|f| f.supports(task)).collect()
        }
    }

    pub fn grid(&self, family: Family) -> Vec<Hyperparams> {
        self.grids.get(&family).cloned().unwrap_or_else(|| family.default_grid())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    /// Master seed; every stochastic stage derives its own stream from it.
    pub seed: Option<u64>,
    pub stages: Stages,
    pub inputs: Inputs,
    pub scenario: ScenarioConfig,
    pub matching: MatchParams,
    pub align: AlignConfig,
    pub features: FeatureSettings,
    pub selection: SelectionSettings,
    pub training: TrainingSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("out"),
            seed: Some(0),
            stages: Stages::default(),
            inputs: Inputs::default(),
            scenario: ScenarioConfig::default(),
            matching: MatchParams::default(),
            align: AlignConfig::default(),
            features: FeatureSettings::default(),
            selection: SelectionSettings::default(),
            training: TrainingSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        if !path.exists() {
            bail!("config file {} does not exist", path.display());
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seed.is_none() {
            if let Some(stage) = Stage::ORDER.into_iter().find(|&s| s.is_stochastic() && self.stages.enabled(s)) {
                bail!("stage {stage} is stochastic and needs a seed");
            }
        }
        let sel = &self.selection;
        if !(sel.train_frac > 0.0 && sel.train_frac < 1.0) {
            bail!("train_frac must lie in (0, 1), got {}", sel.train_frac);
        }
        if !(sel.pca_target > 0.0 && sel.pca_target <= 1.0) {
            bail!("pca_target must lie in (0, 1], got {}", sel.pca_target);
        }
        let sc = &self.scenario;
        if sc.class_mix.iter().sum::<usize>() == 0 {
            bail!("class_mix has no sections");
        }
        if sc.class_iri.iter().any(|r| !(r[0] > 0.0 && r[1] >= r[0])) {
            bail!("class_iri intervals must be positive and ordered");
        }
        if !(sc.section_min_m > 0.0 && sc.section_max_m >= sc.section_min_m) {
            bail!("bad section lengths {}..{}", sc.section_min_m, sc.section_max_m);
        }
        if !(sc.wheel_path_correlation >= -1.0 && sc.wheel_path_correlation <= 1.0) {
            bail!("wheel_path_correlation must lie in [-1, 1]");
        }
        if !(sc.speed_min_ms > 0.0 && sc.speed_max_ms >= sc.speed_min_ms) {
            bail!("bad speed range {}..{}", sc.speed_min_ms, sc.speed_max_ms);
        }
        if !(sc.speed_knot_min_m > 0.0 && sc.speed_knot_max_m >= sc.speed_knot_min_m) {
            bail!("bad speed knot spacing {}..{}", sc.speed_knot_min_m, sc.speed_knot_max_m);
        }
        if self.features.resample_len < 2 {
            bail!("resample_len must be at least 2");
        }
        if self.training.k_folds < 2 {
            bail!("k_folds must be at least 2");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
