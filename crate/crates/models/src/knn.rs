use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KnnTargets {
    Values(Vec<f64>),
    Classes { labels: Vec<usize>, n_classes: usize },
}

/// Brute-force Euclidean k nearest neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub x: Array2<f64>,
    pub targets: KnnTargets,
}

impl Knn {
    pub fn fit(x: ArrayView2<f64>, targets: KnnTargets, k: usize) -> Result<Self> {
        let n = match &targets {
            KnnTargets::Values(v) => v.len(),
            KnnTargets::Classes { labels, .. } => labels.len(),
        };
        check_xy(&x, n)?;
        if k == 0 || k > n {
            return Err(ModelError::InvalidHyperparameter(format!("k = {k} with {n} training rows")));
        }
        Ok(Self { k, x: x.to_owned(), targets })
    }

    /// Indices of the k nearest rows; distance ties go to the lower row.
    pub fn neighbours(&self, q: ArrayView1<f64>) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .x
            .rows()
            .into_iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, cmp);
            d.truncate(self.k);
        }
        d.sort_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.x.ncols(), &x)?;
        let KnnTargets::Values(y) = &self.targets else {
            return Err(ModelError::WrongTask { fitted: "classification", asked: "regression" });
        };
        Ok(x.rows()
            .into_iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|q| self.neighbours(*q).iter().map(|&i| y[i]).sum::<f64>() / self.k as f64)
            .collect())
    }

    /// Majority vote; ties go to the lower class.
    pub fn predict_classes(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        check_width(self.x.ncols(), &x)?;
        let KnnTargets::Classes { labels, n_classes } = &self.targets else {
            return Err(ModelError::WrongTask { fitted: "regression", asked: "classification" });
        };
        Ok(x.rows()
            .into_iter()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|q| {
                let mut votes = vec![0usize; *n_classes];
                for i in self.neighbours(*q) {
                    votes[labels[i]] += 1;
                }
                (0..*n_classes).fold(0, |b, c| if votes[c] > votes[b] { c } else { b })
            })
            .collect())
    }
}
