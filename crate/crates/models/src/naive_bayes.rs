use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, Result};
use crate::logistic::argmax_rows;

pub const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes. Classes absent from training get zero prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    #[serde(with = "absent_as_null")]
    pub log_prior: Vec<f64>,
    /// classes × features
    pub mean: Array2<f64>,
    pub var: Array2<f64>,
}

impl GaussianNb {
    pub fn fit(x: ArrayView2<f64>, labels: &[usize], n_classes: usize) -> Result<Self> {
        check_xy(&x, labels.len())?;
        let d = x.ncols();
        let mut count = vec![0usize; n_classes];
        let mut mean = Array2::zeros((n_classes, d));
        let mut var = Array2::<f64>::zeros((n_classes, d));
        for (row, &c) in x.rows().into_iter().zip(labels) {
            count[c] += 1;
            let mut m = mean.row_mut(c);
            m += &row;
        }
        for (mut m, &k) in mean.rows_mut().into_iter().zip(&count) {
            if k > 0 {
                m /= k as f64;
            }
        }
        for (row, &c) in x.rows().into_iter().zip(labels) {
            for j in 0..d {
                var[[c, j]] += (row[j] - mean[[c, j]]).powi(2);
            }
        }
        for c in 0..n_classes {
            for j in 0..d {
                var[[c, j]] = if count[c] > 0 { (var[[c, j]] / count[c] as f64).max(VAR_FLOOR) } else { 1.0 };
            }
        }
        let n = labels.len() as f64;
        let log_prior = count.iter().map(|&k| if k > 0 { (k as f64 / n).ln() } else { f64::NEG_INFINITY }).collect();
        Ok(Self { log_prior, mean, var })
    }

    /// Unnormalized log posteriors, classes in columns.
    pub fn joint_log_likelihood(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_width(self.mean.ncols(), &x)?;
        let k = self.log_prior.len();
        let mut out = Array2::zeros((x.nrows(), k));
        let ln2pi = (2.0 * std::f64::consts::PI).ln();
        for (i, row) in x.rows().into_iter().enumerate() {
            for c in 0..k {
                let mut s = self.log_prior[c];
                for (j, &v) in row.iter().enumerate() {
                    let var = self.var[[c, j]];
                    s -= 0.5 * (ln2pi + var.ln() + (v - self.mean[[c, j]]).powi(2) / var);
                }
                out[[i, c]] = s;
            }
        }
        Ok(out)
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut j = self.joint_log_likelihood(x)?;
        crate::logistic::softmax_rows(&mut j);
        Ok(j)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.joint_log_likelihood(x)?))
    }
}

// JSON has no infinities; an absent class's log-prior is stored as null.
mod absent_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|&p| p.is_finite().then_some(p)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v = Vec::<Option<f64>>::deserialize(d)?;
        Ok(v.into_iter().map(|p| p.unwrap_or(f64::NEG_INFINITY)).collect())
    }
}
