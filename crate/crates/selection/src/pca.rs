//! Principal components of standardized features.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SelectionError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaBasis {
    pub mean: Array1<f64>,
    /// features × kept components, orthonormal columns
    pub components: Array2<f64>,
    /// Explained-variance ratio of every component, largest first.
    pub ratios: Vec<f64>,
}

impl PcaBasis {
    pub fn n_components(&self) -> usize {
        self.components.ncols()
    }

    pub fn kept_ratio(&self) -> f64 {
        self.ratios[..self.n_components()].iter().sum()
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(SelectionError::InvalidInput(format!("{} columns, basis fitted on {}", x.ncols(), self.mean.len())));
        }
        Ok((&x - &self.mean).dot(&self.components))
    }

    pub fn inverse(&self, scores: ArrayView2<f64>) -> Array2<f64> {
        scores.dot(&self.components.t()) + &self.mean
    }
}

/// Sample covariance of the columns of `x`.
pub fn covariance(x: ArrayView2<f64>) -> Array2<f64> {
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let c = &x - &mean;
    let cov = c.t().dot(&c) / (x.nrows() as f64 - 1.0).max(1.0);
    // exact symmetry for the eigensolver
    (&cov + &cov.t()) * 0.5
}

/// Keep the fewest leading components whose explained variance reaches
/// `target`.
pub fn pca_fit(x: ArrayView2<f64>, target: f64) -> Result<PcaBasis> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(SelectionError::InvalidInput(format!("variance target {target} outside (0, 1]")));
    }
    let (n, d) = x.dim();
    if n < 2 || d == 0 {
        return Err(SelectionError::InvalidInput(format!("PCA needs at least 2 rows and 1 column, got {:?}", x.dim())));
    }
    let cov = covariance(x);
    let eig = SymmetricEigen::new(DMatrix::from_fn(d, d, |i, j| cov[[i, j]]));
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if !(total > 0.0) {
        return Err(SelectionError::NoVariance);
    }
    let ratios: Vec<f64> = values.iter().map(|v| v / total).collect();
    let mut m = 0;
    let mut acc = 0.0;
    while m < d && acc < target - 1e-12 {
        acc += ratios[m];
        m += 1;
    }
    let mut components = Array2::zeros((d, m));
    for (c, &i) in idx[..m].iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        // sign convention: the largest-magnitude loading is positive
        let pivot = (0..d).fold(0, |b, r| if v[r].abs() > v[b].abs() { r } else { b });
        let s = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for r in 0..d {
            components[[r, c]] = s * v[r];
        }
    }
    Ok(PcaBasis { mean: x.mean_axis(Axis(0)).expect("non-empty"), components, ratios })
}
