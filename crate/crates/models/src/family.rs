//! Model families behind one fit/predict interface.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use roadrough_core::{HpValue, Hyperparams};
use serde::{Deserialize, Serialize};

use crate::baseline::Baseline;
use crate::error::{ModelError, Result};
use crate::forest::{resolve_max_features, ForestParams, RandomForest, Targets};
use crate::knn::{Knn, KnnTargets};
use crate::linear::LinearModel;
use crate::logistic::{LogisticModel, MultiClass};
use crate::mlp::{Mlp, MlpParams, MlpTargets};
use crate::naive_bayes::GaussianNb;
use crate::svm::{fit_svr, Svm};

pub const SVR_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Baseline,
    Linear,
    Lasso,
    Ridge,
    ElasticNet,
    Logistic,
    Knn,
    NaiveBayes,
    RandomForest,
    Svm,
    Mlp,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Baseline,
        Family::Linear,
        Family::Lasso,
        Family::Ridge,
        Family::ElasticNet,
        Family::Logistic,
        Family::Knn,
        Family::NaiveBayes,
        Family::RandomForest,
        Family::Svm,
        Family::Mlp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Baseline => "baseline",
            Family::Linear => "linear",
            Family::Lasso => "lasso",
            Family::Ridge => "ridge",
            Family::ElasticNet => "elastic_net",
            Family::Logistic => "logistic",
            Family::Knn => "knn",
            Family::NaiveBayes => "naive_bayes",
            Family::RandomForest => "random_forest",
            Family::Svm => "svm",
            Family::Mlp => "mlp",
        }
    }

    pub fn supports(self, task: Task) -> bool {
        match self {
            Family::Linear | Family::Lasso | Family::Ridge | Family::ElasticNet => task == Task::Regression,
            Family::Logistic | Family::NaiveBayes => task == Task::Classification,
            _ => true,
        }
    }

    /// Families fitted for a task, baseline first.
    pub fn for_task(task: Task) -> Vec<Family> {
        Self::ALL.into_iter().filter(|f| f.supports(task)).collect()
    }

    pub fn default_grid(self) -> Vec<Hyperparams> {
        let num = |name: &str, vals: &[f64]| -> Vec<Hyperparams> {
            vals.iter().map(|&v| Hyperparams::new().with(name, HpValue::Num(v))).collect()
        };
        match self {
            Family::Baseline | Family::Linear | Family::NaiveBayes => vec![Hyperparams::new()],
            Family::Lasso => num("lambda", &[0.01, 0.05, 0.1]),
            Family::Ridge => num("lambda", &[60.0, 600.0, 6000.0]),
            Family::Logistic => num("lambda", &[0.01, 0.1, 1.0]),
            Family::ElasticNet => product(&num("lambda", &[0.01, 0.05, 0.1]), "l1_ratio", &[0.2, 0.5, 0.8].map(HpValue::Num)),
            Family::Knn => [5, 22, 50].iter().map(|&k| Hyperparams::new().with("k", HpValue::Int(k))).collect(),
            Family::RandomForest => {
                let trees: Vec<Hyperparams> =
                    [100, 400].iter().map(|&t| Hyperparams::new().with("n_trees", HpValue::Int(t))).collect();
                let depth = product(&trees, "max_depth", &[HpValue::Int(5), HpValue::Int(10)]);
                product(&depth, "max_features", &[HpValue::Int(6), HpValue::Text("sqrt".into())])
            }
            Family::Svm => product(&num("gamma", &[1e-3, 1e-2]), "C", &[1.0, 10.0].map(HpValue::Num)),
            Family::Mlp => {
                let layers: Vec<Hyperparams> = [vec![2, 4, 6], vec![16, 16]]
                    .into_iter()
                    .map(|l| Hyperparams::new().with("layers", HpValue::Layers(l)).with("lr", HpValue::Num(0.01)))
                    .collect();
                product(&layers, "l2", &[0.1, 1.0].map(HpValue::Num))
            }
        }
    }
}

fn product(base: &[Hyperparams], name: &str, values: &[HpValue]) -> Vec<Hyperparams> {
    base.iter().flat_map(|hp| values.iter().map(move |v| hp.clone().with(name, v.clone()))).collect()
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ModelError::InvalidInput(format!("unknown model family '{s}'")))
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Baseline(Baseline),
    Linear(LinearModel),
    Logistic(LogisticModel),
    Knn(Knn),
    NaiveBayes(GaussianNb),
    RandomForest(RandomForest),
    Svm(Svm),
    Mlp(Mlp),
}

fn num(hp: &Hyperparams, name: &str, default: f64) -> Result<f64> {
    Ok(hp.f64_or(name, default)?)
}

fn int(hp: &Hyperparams, name: &str, default: usize) -> Result<usize> {
    Ok(hp.usize_or(name, default)?)
}

fn max_features(hp: &Hyperparams, d: usize) -> Result<usize> {
    match hp.get("max_features") {
        None => Ok(resolve_max_features(None, d)),
        Some(HpValue::Text(s)) if s == "sqrt" => Ok(resolve_max_features(None, d)),
        Some(v) => v
            .as_usize()
            .filter(|&m| m > 0)
            .map(|m| m.min(d))
            .ok_or_else(|| ModelError::InvalidHyperparameter(format!("max_features {v}"))),
    }
}

fn forbid(family: Family, targets: &Targets) -> ModelError {
    let asked = match targets {
        Targets::Values(_) => "regression",
        Targets::Classes { .. } => "classification",
    };
    ModelError::InvalidInput(format!("{family} does not support {asked}"))
}

/// Fit one family with the given hyperparameters; `seed` drives every random
/// choice.
pub fn fit_model(family: Family, x: ArrayView2<f64>, targets: Targets, hp: &Hyperparams, seed: u64) -> Result<Model> {
    let task = match targets {
        Targets::Values(_) => Task::Regression,
        Targets::Classes { .. } => Task::Classification,
    };
    if !family.supports(task) {
        return Err(forbid(family, &targets));
    }
    Ok(match (family, targets) {
        (Family::Baseline, Targets::Values(y)) => Model::Baseline(Baseline::fit_regression(y)?),
        (Family::Baseline, Targets::Classes { labels, n_classes }) => {
            Model::Baseline(Baseline::fit_classification(labels, n_classes)?)
        }
        (Family::Linear, Targets::Values(y)) => Model::Linear(LinearModel::fit_ols(x, y)?),
        (Family::Ridge, Targets::Values(y)) => Model::Linear(LinearModel::fit_ridge(x, y, num(hp, "lambda", 600.0)?)?),
        (Family::Lasso, Targets::Values(y)) => Model::Linear(LinearModel::fit_lasso(x, y, num(hp, "lambda", 0.05)?)?),
        (Family::ElasticNet, Targets::Values(y)) => Model::Linear(LinearModel::fit_elastic_net(
            x,
            y,
            num(hp, "lambda", 0.05)?,
            num(hp, "l1_ratio", 0.2)?,
        )?),
        (Family::Logistic, Targets::Classes { labels, n_classes }) => {
            let scheme = match hp.get("multi_class") {
                Some(HpValue::Text(s)) => s.parse()?,
                Some(v) => return Err(ModelError::InvalidHyperparameter(format!("multi_class {v}"))),
                None => MultiClass::default(),
            };
            Model::Logistic(LogisticModel::fit(x, labels, n_classes, num(hp, "lambda", 0.1)?, scheme)?)
        }
        (Family::Knn, t) => {
            let targets = match t {
                Targets::Values(y) => KnnTargets::Values(y.to_vec()),
                Targets::Classes { labels, n_classes } => KnnTargets::Classes { labels: labels.to_vec(), n_classes },
            };
            Model::Knn(Knn::fit(x, targets, int(hp, "k", 22)?)?)
        }
        (Family::NaiveBayes, Targets::Classes { labels, n_classes }) => {
            Model::NaiveBayes(GaussianNb::fit(x, labels, n_classes)?)
        }
        (Family::RandomForest, t) => {
            let params = ForestParams {
                n_trees: int(hp, "n_trees", 400)?,
                max_depth: int(hp, "max_depth", 5)?,
                max_features: max_features(hp, x.ncols())?,
                bootstrap: true,
                seed,
            };
            Model::RandomForest(RandomForest::fit(x, t, &params)?)
        }
        (Family::Svm, Targets::Values(y)) => Model::Svm(Svm::Svr(fit_svr(
            x,
            y,
            num(hp, "C", 1.0)?,
            num(hp, "gamma", 1e-3)?,
            num(hp, "epsilon", SVR_EPSILON)?,
        )?)),
        (Family::Svm, Targets::Classes { labels, n_classes }) => {
            Model::Svm(Svm::fit_classifier(x, labels, n_classes, num(hp, "C", 1.0)?, num(hp, "gamma", 1e-3)?)?)
        }
        (Family::Mlp, t) => {
            let layers = match hp.get("layers") {
                Some(HpValue::Layers(l)) => l.clone(),
                Some(v) => return Err(ModelError::InvalidHyperparameter(format!("layers {v}"))),
                None => vec![2, 4, 6],
            };
            let params = MlpParams { layers, lr0: num(hp, "lr", 0.01)?, l2: num(hp, "l2", 1.0)?, seed, ..Default::default() };
            let targets = match t {
                Targets::Values(y) => MlpTargets::Values(y),
                Targets::Classes { labels, n_classes } => MlpTargets::Classes { labels, n_classes },
            };
            Model::Mlp(Mlp::fit(x, targets, &params)?)
        }
        (family, t) => return Err(forbid(family, &t)),
    })
}

impl Model {
    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        match self {
            Model::Baseline(Baseline::Mean(m)) => Ok(vec![*m; x.nrows()]),
            Model::Linear(m) => m.predict(x),
            Model::Knn(m) => m.predict_values(x),
            Model::RandomForest(m) => m.predict_values(x),
            Model::Svm(m) => m.predict_values(x),
            Model::Mlp(m) => m.predict_values(x),
            _ => Err(ModelError::WrongTask { fitted: "classification", asked: "regression" }),
        }
    }

    pub fn predict_classes(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        match self {
            Model::Baseline(Baseline::Majority(c)) => Ok(vec![*c; x.nrows()]),
            Model::Logistic(m) => m.predict(x),
            Model::Knn(m) => m.predict_classes(x),
            Model::NaiveBayes(m) => m.predict(x),
            Model::RandomForest(m) => m.predict_classes(x),
            Model::Svm(m) => m.predict_classes(x),
            Model::Mlp(m) => m.predict_classes(x),
            _ => Err(ModelError::WrongTask { fitted: "regression", asked: "classification" }),
        }
    }
}
