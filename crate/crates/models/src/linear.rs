//! Ordinary, ridge, lasso and elastic-net least squares.
//!
//! Objectives (intercept never penalized):
//! ridge `‖y − Xw − b‖² + λ‖w‖²`, elastic net
//! `‖y − Xw − b‖² / 2n + λρ‖w‖₁ + λ(1 − ρ)‖w‖² / 2` with lasso at `ρ = 1`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};

pub const CD_TOL: f64 = 1e-6;
pub const CD_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Coordinate-descent sweeps used; 0 for closed-form fits.
    pub sweeps: usize,
}

struct Centered {
    x: ndarray::Array2<f64>,
    y: Array1<f64>,
    x_mean: Array1<f64>,
    y_mean: f64,
}

fn center(x: &ArrayView2<f64>, y: &[f64]) -> Result<Centered> {
    check_xy(x, y.len())?;
    let x_mean = x.mean_axis(Axis(0)).expect("non-empty");
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    Ok(Centered {
        x: x - &x_mean,
        y: Array1::from_iter(y.iter().map(|v| v - y_mean)),
        x_mean,
        y_mean,
    })
}

impl LinearModel {
    fn from_centered(c: &Centered, coef: Vec<f64>, sweeps: usize) -> Self {
        let intercept = c.y_mean - c.x_mean.iter().zip(&coef).map(|(m, w)| m * w).sum::<f64>();
        Self { coef, intercept, sweeps }
    }

    pub fn fit_ols(x: ArrayView2<f64>, y: &[f64]) -> Result<Self> {
        Self::solve_normal(x, y, 0.0)
    }

    pub fn fit_ridge(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ModelError::InvalidHyperparameter(format!("ridge lambda {lambda}")));
        }
        Self::solve_normal(x, y, lambda)
    }

    fn solve_normal(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Result<Self> {
        let c = center(&x, y)?;
        let d = c.x.ncols();
        let mut gram = c.x.t().dot(&c.x);
        let rhs = c.x.t().dot(&c.y);
        let scale = gram.diag().iter().fold(0.0f64, |m, v| m.max(*v));
        for j in 0..d {
            gram[[j, j]] += lambda;
        }
        let a = DMatrix::from_fn(d, d, |i, j| gram[[i, j]]);
        let chol = a.cholesky().ok_or(ModelError::Singular)?;
        let l = chol.l();
        let min_pivot = (0..d).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
        if min_pivot <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(ModelError::Singular);
        }
        let w = chol.solve(&DVector::from_iterator(d, rhs.iter().copied()));
        Ok(Self::from_centered(&c, w.iter().copied().collect(), 0))
    }

    pub fn fit_lasso(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> Result<Self> {
        Self::fit_elastic_net(x, y, lambda, 1.0)
    }

    /// Cyclic coordinate descent with soft-thresholding.
    pub fn fit_elastic_net(x: ArrayView2<f64>, y: &[f64], lambda: f64, l1_ratio: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ModelError::InvalidHyperparameter(format!("lambda {lambda}")));
        }
        if !(0.0..=1.0).contains(&l1_ratio) {
            return Err(ModelError::InvalidHyperparameter(format!("l1_ratio {l1_ratio}")));
        }
        let c = center(&x, y)?;
        let (n, d) = c.x.dim();
        let nf = n as f64;
        let l1 = lambda * l1_ratio;
        let l2 = lambda * (1.0 - l1_ratio);
        let cols: Vec<Array1<f64>> = (0..d).map(|j| c.x.column(j).to_owned()).collect();
        let sq: Vec<f64> = cols.iter().map(|col| col.dot(col) / nf).collect();
        let mut w = vec![0.0; d];
        let mut r = c.y.clone();
        let mut sweeps = 0;
        while sweeps < CD_MAX_SWEEPS {
            sweeps += 1;
            let mut max_change = 0.0f64;
            for j in 0..d {
                if sq[j] == 0.0 {
                    continue;
                }
                let rho = cols[j].dot(&r) / nf + sq[j] * w[j];
                let new = soft_threshold(rho, l1) / (sq[j] + l2);
                let delta = new - w[j];
                if delta != 0.0 {
                    r.scaled_add(-delta, &cols[j]);
                    w[j] = new;
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < CD_TOL {
                return Ok(Self::from_centered(&c, w, sweeps));
            }
        }
        log::warn!("coordinate descent stopped after {CD_MAX_SWEEPS} sweeps");
        Ok(Self::from_centered(&c, w, sweeps))
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.coef.len(), &x)?;
        let w = Array1::from_vec(self.coef.clone());
        Ok(x.dot(&w).iter().map(|v| v + self.intercept).collect())
    }
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Smallest lasso penalty at which every coefficient is zero.
pub fn lasso_critical_lambda(x: ArrayView2<f64>, y: &[f64]) -> Result<f64> {
    let c = center(&x, y)?;
    let n = c.x.nrows() as f64;
    Ok(c.x.t().dot(&c.y).iter().fold(0.0f64, |m, v| m.max(v.abs())) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn exact_line() {
        let x = array![[1.0], [2.0], [3.0]];
        let m = LinearModel::fit_ols(x.view(), &[2.0, 4.0, 6.0]).unwrap();
        assert!((m.coef[0] - 2.0).abs() < 1e-9 && m.intercept.abs() < 1e-9);
    }

    #[test]
    fn ridge_zero_is_ols() {
        let x = array![[1.0, 0.3], [2.0, -1.0], [3.0, 0.5], [4.0, 2.0], [0.5, 0.1]];
        let y = [1.0, 2.5, 2.0, 5.0, 0.2];
        let a = LinearModel::fit_ols(x.view(), &y).unwrap();
        let b = LinearModel::fit_ridge(x.view(), &y, 0.0).unwrap();
        for (p, q) in a.coef.iter().zip(&b.coef) {
            assert!((p - q).abs() < 1e-9);
        }
        assert!((a.intercept - b.intercept).abs() < 1e-9);
    }

    #[test]
    fn collinear_columns_are_singular() {
        let x = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert!(matches!(LinearModel::fit_ols(x.view(), &[1.0, 2.0, 3.0]), Err(ModelError::Singular)));
        assert!(LinearModel::fit_ridge(x.view(), &[1.0, 2.0, 3.0], 1.0).is_ok());
    }
}
