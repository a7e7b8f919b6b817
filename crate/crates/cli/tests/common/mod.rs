#![allow(dead_code)]

use std::path::Path;

use roadrough_cli::config::{FeatureSet, PipelineConfig};
use roadrough_core::{HpValue, Hyperparams};
use roadrough_models::Family;

/// A 3 km survey with trimmed grids: every stage runs in seconds.
pub fn small_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig { out_dir: out.to_path_buf(), seed: Some(11), ..Default::default() };
    cfg.scenario.length_m = 3000.0;
    cfg.scenario.section_min_m = 150.0;
    cfg.scenario.section_max_m = 400.0;
    cfg.selection.sfs.max_features = 3;
    cfg.selection.sfs.n_trees = 10;
    cfg.training.k_folds = 3;
    cfg.training.feature_sets = vec![FeatureSet::Sfs, FeatureSet::Pca];
    let one = |name: &str, v: HpValue| vec![Hyperparams::new().with(name, v)];
    cfg.training.grids.insert(
        Family::RandomForest,
        vec![Hyperparams::new().with("n_trees", HpValue::Int(20)).with("max_depth", HpValue::Int(4))],
    );
    cfg.training.grids.insert(Family::Svm, vec![Hyperparams::new().with("gamma", HpValue::Num(0.01)).with("C", HpValue::Num(1.0))]);
    cfg.training.grids.insert(Family::Knn, one("k", HpValue::Int(5)));
    cfg.training.grids.insert(
        Family::Mlp,
        vec![Hyperparams::new().with("layers", HpValue::Layers(vec![8])).with("l2", HpValue::Num(0.1))],
    );
    cfg
}

pub fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}
