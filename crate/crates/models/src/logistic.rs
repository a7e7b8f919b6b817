//! L2-regularized logistic regression.
//!
//! Objective per block: mean cross-entropy `+ λ‖W‖²`, intercepts unpenalized.
//! Multinomial uses one softmax block; one-vs-rest fits one two-class block
//! per class and normalizes the per-class probabilities.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};
use crate::optim::minimize;

pub const GRAD_TOL: f64 = 1e-6;
pub const MAX_ITER: usize = 50_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MultiClass {
    #[default]
    Multinomial,
    Ovr,
}

impl std::str::FromStr for MultiClass {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multinomial" => Ok(Self::Multinomial),
            "ovr" => Ok(Self::Ovr),
            _ => Err(ModelError::InvalidHyperparameter(format!("multi_class {s}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxBlock {
    /// classes × features
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl SoftmaxBlock {
    fn proba(&self, x: &ArrayView2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.w.t()) + &self.b;
        softmax_rows(&mut z);
        z
    }
}

pub fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row /= s;
    }
}

/// Loss and gradient for flattened parameters `[W row-major, b]`.
pub fn objective(x: &ArrayView2<f64>, labels: &[usize], k: usize, lambda: f64, params: &[f64]) -> (f64, Vec<f64>) {
    let (n, d) = x.dim();
    let w = ArrayView2::from_shape((k, d), &params[..k * d]).expect("shape");
    let b = ndarray::ArrayView1::from(&params[k * d..]);
    let mut p = x.dot(&w.t()) + b;
    softmax_rows(&mut p);
    let mut loss = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        loss -= p[[i, y]].max(1e-300).ln();
        p[[i, y]] -= 1.0;
    }
    loss /= n as f64;
    loss += lambda * w.iter().map(|v| v * v).sum::<f64>();
    p /= n as f64;
    let gw = p.t().dot(x) + &(&w * (2.0 * lambda));
    let gb = p.sum_axis(Axis(0));
    let mut grad = gw.into_raw_vec_and_offset().0;
    grad.extend(gb.iter());
    (loss, grad)
}

fn fit_block(x: &ArrayView2<f64>, labels: &[usize], k: usize, lambda: f64) -> Result<SoftmaxBlock> {
    let d = x.ncols();
    let m = minimize(|p| objective(x, labels, k, lambda, p), vec![0.0; k * (d + 1)], GRAD_TOL, MAX_ITER, "logistic regression")?;
    Ok(SoftmaxBlock {
        w: Array2::from_shape_vec((k, d), m.x[..k * d].to_vec()).expect("shape"),
        b: Array1::from_vec(m.x[k * d..].to_vec()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub n_classes: usize,
    pub scheme: MultiClass,
    pub blocks: Vec<SoftmaxBlock>,
}

impl LogisticModel {
    pub fn fit(x: ArrayView2<f64>, labels: &[usize], n_classes: usize, lambda: f64, scheme: MultiClass) -> Result<Self> {
        check_xy(&x, labels.len())?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ModelError::InvalidHyperparameter(format!("lambda {lambda}")));
        }
        let mut present = vec![false; n_classes];
        for &c in labels {
            present[c] = true;
        }
        if present.iter().filter(|p| **p).count() < 2 {
            return Err(ModelError::InvalidInput("logistic regression needs at least 2 classes".into()));
        }
        let blocks = match scheme {
            MultiClass::Multinomial => vec![fit_block(&x, labels, n_classes, lambda)?],
            MultiClass::Ovr => (0..n_classes)
                .map(|c| {
                    let bin: Vec<usize> = labels.iter().map(|&l| usize::from(l == c)).collect();
                    fit_block(&x, &bin, 2, lambda)
                })
                .collect::<Result<_>>()?,
        };
        Ok(Self { n_classes, scheme, blocks })
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_width(self.blocks[0].w.ncols(), &x)?;
        Ok(match self.scheme {
            MultiClass::Multinomial => self.blocks[0].proba(&x),
            MultiClass::Ovr => {
                let mut p = Array2::zeros((x.nrows(), self.n_classes));
                for (c, block) in self.blocks.iter().enumerate() {
                    p.column_mut(c).assign(&block.proba(&x).column(1));
                }
                for mut row in p.rows_mut() {
                    let s = row.sum();
                    row /= s;
                }
                p
            }
        })
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(x)?))
    }
}

/// Row-wise argmax, ties to the lower index.
pub fn argmax_rows(p: &Array2<f64>) -> Vec<usize> {
    p.rows()
        .into_iter()
        .map(|r| r.iter().enumerate().fold(0, |b, (j, &v)| if v > r[b] { j } else { b }))
        .collect()
}
