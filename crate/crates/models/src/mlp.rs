//! Fully connected ReLU network trained with mini-batch Adam.
//!
//! Regression uses a linear output with loss `½·mean(ŷ−y)²`; classification
//! uses a softmax output with mean cross-entropy. Both add the weight decay
//! `α/(2·batch)·Σ‖W‖²` (biases unpenalized).

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};
use crate::logistic::{argmax_rows, softmax_rows};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub layers: Vec<usize>,
    pub lr0: f64,
    pub l2: f64,
    pub batch: usize,
    pub max_epochs: usize,
    pub tol: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { layers: vec![16, 16], lr0: 0.01, l2: 0.1, batch: 200, max_epochs: 200, tol: 1e-4, patience: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum MlpTargets<'a> {
    Values(&'a [f64]),
    Classes { labels: &'a [usize], n_classes: usize },
}

impl MlpTargets<'_> {
    fn len(&self) -> usize {
        match self {
            Self::Values(v) => v.len(),
            Self::Classes { labels, .. } => labels.len(),
        }
    }

    fn outputs(&self) -> usize {
        match self {
            Self::Values(_) => 1,
            Self::Classes { n_classes, .. } => *n_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// inputs × outputs
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub classification: bool,
    pub layers: Vec<Layer>,
    pub epochs: usize,
    pub loss_curve: Vec<f64>,
}

fn forward(layers: &[Layer], x: ArrayView2<f64>, classification: bool) -> Vec<Array2<f64>> {
    let mut acts = vec![x.to_owned()];
    for (l, layer) in layers.iter().enumerate() {
        let mut z = acts[l].dot(&layer.w) + &layer.b;
        if l + 1 < layers.len() {
            z.mapv_inplace(|v| v.max(0.0));
        } else if classification {
            softmax_rows(&mut z);
        }
        acts.push(z);
    }
    acts
}

/// Batch loss and per-layer gradients `(dW, db)`.
fn loss_grad(layers: &[Layer], x: ArrayView2<f64>, targets: MlpTargets, rows: &[usize], l2: f64) -> (f64, Vec<Layer>) {
    let n = rows.len() as f64;
    let xb = x.select(Axis(0), rows);
    let classification = matches!(targets, MlpTargets::Classes { .. });
    let acts = forward(layers, xb.view(), classification);
    let out = acts.last().expect("output layer");
    let mut delta = out.clone();
    let mut loss = 0.0;
    match targets {
        MlpTargets::Values(y) => {
            for (i, &r) in rows.iter().enumerate() {
                let e = out[[i, 0]] - y[r];
                loss += 0.5 * e * e;
                delta[[i, 0]] = e;
            }
        }
        MlpTargets::Classes { labels, .. } => {
            for (i, &r) in rows.iter().enumerate() {
                loss -= out[[i, labels[r]]].max(1e-300).ln();
                delta[[i, labels[r]]] -= 1.0;
            }
        }
    }
    loss /= n;
    delta /= n;
    loss += 0.5 * l2 / n * layers.iter().map(|l| l.w.iter().map(|v| v * v).sum::<f64>()).sum::<f64>();

    let mut grads: Vec<Layer> = Vec::with_capacity(layers.len());
    for l in (0..layers.len()).rev() {
        let gw = acts[l].t().dot(&delta) + &(&layers[l].w * (l2 / n));
        let gb = delta.sum_axis(Axis(0));
        if l > 0 {
            let mut next = delta.dot(&layers[l].w.t());
            next.zip_mut_with(&acts[l], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0
                }
            });
            delta = next;
        }
        grads.push(Layer { w: gw, b: gb });
    }
    grads.reverse();
    (loss, grads)
}

fn sizes(d: usize, hidden: &[usize], out: usize) -> Vec<usize> {
    std::iter::once(d).chain(hidden.iter().copied()).chain(std::iter::once(out)).collect()
}

fn unflatten(sizes: &[usize], flat: &[f64]) -> Vec<Layer> {
    let mut at = 0;
    sizes
        .windows(2)
        .map(|s| {
            let w = Array2::from_shape_vec((s[0], s[1]), flat[at..at + s[0] * s[1]].to_vec()).expect("shape");
            at += s[0] * s[1];
            let b = Array1::from(flat[at..at + s[1]].to_vec());
            at += s[1];
            Layer { w, b }
        })
        .collect()
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()).copied().collect::<Vec<_>>()).collect()
}

/// Number of parameters of a network with the given hidden sizes.
pub fn n_params(d: usize, hidden: &[usize], outputs: usize) -> usize {
    sizes(d, hidden, outputs).windows(2).map(|s| s[0] * s[1] + s[1]).sum()
}

/// Full-batch loss and gradient for flattened parameters, laid out per layer
/// as `[W row-major (inputs × outputs), b]`.
pub fn objective(x: ArrayView2<f64>, targets: MlpTargets, hidden: &[usize], l2: f64, params: &[f64]) -> (f64, Vec<f64>) {
    let layers = unflatten(&sizes(x.ncols(), hidden, targets.outputs()), params);
    let rows: Vec<usize> = (0..x.nrows()).collect();
    let (loss, grads) = loss_grad(&layers, x, targets, &rows, l2);
    (loss, flatten(&grads))
}

fn init(sizes: &[usize], rng: &mut ChaCha8Rng) -> Vec<Layer> {
    sizes
        .windows(2)
        .map(|s| {
            let bound = (6.0 / (s[0] + s[1]) as f64).sqrt();
            let w = Array2::from_shape_simple_fn((s[0], s[1]), || rng.random_range(-bound..bound));
            let b = Array1::from_shape_simple_fn(s[1], || rng.random_range(-bound..bound));
            Layer { w, b }
        })
        .collect()
}

impl Mlp {
    pub fn fit(x: ArrayView2<f64>, targets: MlpTargets, params: &MlpParams) -> Result<Self> {
        check_xy(&x, targets.len())?;
        if params.layers.contains(&0) || !(params.lr0 > 0.0) || !(params.l2 >= 0.0) || params.batch == 0 {
            return Err(ModelError::InvalidHyperparameter(format!(
                "layers {:?}, lr0 {}, l2 {}, batch {}",
                params.layers, params.lr0, params.l2, params.batch
            )));
        }
        if let MlpTargets::Classes { labels, n_classes } = targets {
            if n_classes < 2 || labels.iter().any(|&c| c >= n_classes) {
                return Err(ModelError::InvalidInput(format!("labels must lie in 0..{n_classes} with at least 2 classes")));
            }
        }
        let classification = matches!(targets, MlpTargets::Classes { .. });
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut layers = init(&sizes(x.ncols(), &params.layers, targets.outputs()), &mut rng);
        let zeros = |ls: &[Layer]| -> Vec<Layer> {
            ls.iter().map(|l| Layer { w: Array2::zeros(l.w.raw_dim()), b: Array1::zeros(l.b.len()) }).collect()
        };
        let mut m = zeros(&layers);
        let mut v = zeros(&layers);
        let mut step = 0i32;
        let mut lr = params.lr0;
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let mut best = f64::INFINITY;
        let mut stale = 0;
        let mut curve = Vec::new();

        for _ in 0..params.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for rows in order.chunks(params.batch) {
                let (loss, grads) = loss_grad(&layers, x, targets, rows, params.l2);
                if !loss.is_finite() {
                    return Err(ModelError::Diverged(loss));
                }
                epoch_loss += loss * rows.len() as f64;
                step += 1;
                let c1 = 1.0 - BETA1.powi(step);
                let c2 = 1.0 - BETA2.powi(step);
                let rate = lr * c2.sqrt() / c1;
                for ((layer, g), (mi, vi)) in layers.iter_mut().zip(&grads).zip(m.iter_mut().zip(v.iter_mut())) {
                    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
                        *m = BETA1 * *m + (1.0 - BETA1) * g;
                        *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                        *p -= rate * *m / (v.sqrt() + ADAM_EPS);
                    };
                    ndarray::Zip::from(&mut layer.w).and(&g.w).and(&mut mi.w).and(&mut vi.w).for_each(|p, &g, m, v| update(p, g, m, v));
                    ndarray::Zip::from(&mut layer.b).and(&g.b).and(&mut mi.b).and(&mut vi.b).for_each(|p, &g, m, v| update(p, g, m, v));
                }
            }
            epoch_loss /= x.nrows() as f64;
            if !epoch_loss.is_finite() {
                return Err(ModelError::Diverged(epoch_loss));
            }
            curve.push(epoch_loss);
            if epoch_loss > best - params.tol {
                stale += 1;
                if stale % 2 == 0 {
                    lr *= 0.5;
                }
                if stale >= params.patience {
                    break;
                }
            } else {
                stale = 0;
            }
            best = best.min(epoch_loss);
        }
        if layers.iter().any(|l| l.w.iter().chain(l.b.iter()).any(|p| !p.is_finite())) {
            return Err(ModelError::Diverged(f64::NAN));
        }
        Ok(Self { classification, layers, epochs: curve.len(), loss_curve: curve })
    }

    fn n_inputs(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.n_inputs(), &x)?;
        if self.classification {
            return Err(ModelError::WrongTask { fitted: "classification", asked: "regression" });
        }
        Ok(forward(&self.layers, x, false).pop().expect("output").column(0).to_vec())
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_width(self.n_inputs(), &x)?;
        if !self.classification {
            return Err(ModelError::WrongTask { fitted: "regression", asked: "classification" });
        }
        Ok(forward(&self.layers, x, true).pop().expect("output"))
    }

    pub fn predict_classes(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.predict_proba(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn flatten_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sizes(3, &[4, 2], 2);
        let layers = init(&s, &mut rng);
        let flat = flatten(&layers);
        assert_eq!(flat.len(), n_params(3, &[4, 2], 2));
        assert_eq!(unflatten(&s, &flat), layers);
    }

    #[test]
    fn learns_a_line() {
        let x = Array2::from_shape_fn((100, 1), |(i, _)| i as f64 / 50.0 - 1.0);
        let y: Vec<f64> = x.column(0).iter().map(|v| 3.0 * v + 1.0).collect();
        let p = MlpParams { layers: vec![], l2: 0.0, max_epochs: 2000, tol: 1e-12, patience: 50, ..Default::default() };
        let m = Mlp::fit(x.view(), MlpTargets::Values(&y), &p).unwrap();
        let yhat = m.predict_values(array![[0.5]].view()).unwrap();
        assert!((yhat[0] - 2.5).abs() < 1e-2, "{yhat:?}");
    }
}
