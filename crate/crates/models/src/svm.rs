//! Kernel support vector machines trained by sequential minimal optimization.
//!
//! The dual `min ½ αᵀQα + pᵀα` s.t. `yᵀα = 0`, `0 ≤ α ≤ C` is solved with
//! second-order working-set selection. Regression uses the 2n-variable
//! ε-insensitive dual; multiclass classification trains one machine per class
//! against the rest.

use std::collections::VecDeque;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};

pub const KKT_TOL: f64 = 1e-3;
const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 200 << 20;

pub fn rbf(a: ArrayView1<f64>, b: ArrayView1<f64>, gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b.iter()).map(|(u, v)| (u - v) * (u - v)).sum::<f64>()).exp()
}

/// Lazily computed kernel rows with FIFO eviction.
struct KernelCache<'a> {
    x: ArrayView2<'a, f64>,
    sq: Vec<f64>,
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
    queue: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    fn new(x: ArrayView2<'a, f64>, gamma: f64) -> Self {
        let n = x.nrows();
        Self {
            sq: x.rows().into_iter().map(|r| r.dot(&r)).collect(),
            x,
            gamma,
            rows: vec![None; n],
            queue: VecDeque::new(),
            capacity: (CACHE_BYTES / (8 * n.max(1))).max(2),
        }
    }

    fn row(&mut self, a: usize) -> &[f64] {
        if self.rows[a].is_none() {
            if self.queue.len() >= self.capacity {
                let old = self.queue.pop_front().expect("non-empty");
                self.rows[old] = None;
            }
            let xa = self.x.row(a);
            let sa = self.sq[a];
            let g = self.gamma;
            let row: Vec<f64> = self
                .x
                .rows()
                .into_iter()
                .zip(&self.sq)
                .map(|(xb, sb)| (-g * (sa + sb - 2.0 * xa.dot(&xb)).max(0.0)).exp())
                .collect();
            self.rows[a] = Some(row);
            self.queue.push_back(a);
        }
        self.rows[a].as_deref().expect("filled")
    }
}

pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Solve the dual over `l = y.len()` variables; variable `t` uses kernel row
/// `t % n`.
fn smo(kernel: &mut KernelCache, y: &[f64], p: &[f64], c: f64, eps: f64) -> Result<DualSolution> {
    let l = y.len();
    let n = kernel.x.nrows();
    let max_iter = (100 * l).max(1_000_000);
    let mut alpha = vec![0.0; l];
    let mut g = p.to_vec();
    let qd = vec![1.0; l];
    let q_row = |kernel: &mut KernelCache, i: usize| -> Vec<f64> {
        let k = kernel.row(i % n);
        (0..l).map(|t| y[i] * y[t] * k[t % n]).collect()
    };
    let up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iter = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            if up(alpha[t], y[t]) && -y[t] * g[t] > gmax {
                gmax = -y[t] * g[t];
                i = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        let qi = if i == usize::MAX { None } else { Some(q_row(kernel, i)) };
        for t in 0..l {
            if !low(alpha[t], y[t]) {
                continue;
            }
            gmax2 = gmax2.max(y[t] * g[t]);
            let Some(qi) = &qi else { continue };
            let diff = gmax + y[t] * g[t];
            if diff > 0.0 {
                let quad = (qd[i] + qd[t] - 2.0 * y[i] * y[t] * qi[t]).max(TAU);
                let obj = -diff * diff / quad;
                if obj < best {
                    best = obj;
                    j = t;
                }
            }
        }
        if gmax + gmax2 < eps || j == usize::MAX {
            break;
        }
        if iter >= max_iter {
            return Err(ModelError::NotConverged {
                what: "SMO",
                detail: format!("max KKT violation {:.3e} after {iter} iterations", gmax + gmax2),
            });
        }
        iter += 1;

        let qi = qi.expect("i selected");
        let qj = q_row(kernel, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * qi[j]).max(TAU);
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * qi[j]).max(TAU);
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..l {
            g[t] += qi[t] * di + qj[t] * dj;
        }
    }

    // offset from free variables, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..l {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };
    let objective = 0.5 * alpha.iter().zip(g.iter().zip(p)).map(|(a, (gt, pt))| a * (gt + pt)).sum::<f64>();
    Ok(DualSolution { alpha, rho, objective, iterations: iter })
}

/// A trained kernel expansion `f(x) = Σ coefᵢ κ(svᵢ, x) − rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMachine {
    pub gamma: f64,
    pub support: Array2<f64>,
    pub coef: Vec<f64>,
    pub rho: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl KernelMachine {
    fn from_dual(x: &ArrayView2<f64>, coef: Vec<f64>, sol: &DualSolution, gamma: f64) -> Self {
        let keep: Vec<usize> = (0..coef.len()).filter(|&i| coef[i] != 0.0).collect();
        let support = Array2::from_shape_fn((keep.len(), x.ncols()), |(r, c)| x[[keep[r], c]]);
        Self {
            gamma,
            support,
            coef: keep.iter().map(|&i| coef[i]).collect(),
            rho: sol.rho,
            dual_objective: sol.objective,
            iterations: sol.iterations,
        }
    }

    pub fn decision(&self, x: ArrayView1<f64>) -> f64 {
        self.support
            .rows()
            .into_iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(sv, x, self.gamma))
            .sum::<f64>()
            - self.rho
    }

    pub fn decisions(&self, x: ArrayView2<f64>) -> Vec<f64> {
        let rows: Vec<_> = x.rows().into_iter().collect();
        rows.par_iter().map(|r| self.decision(*r)).collect()
    }
}

fn check_params(c: f64, gamma: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite() && gamma > 0.0 && gamma.is_finite()) {
        return Err(ModelError::InvalidHyperparameter(format!("C = {c}, gamma = {gamma}")));
    }
    Ok(())
}

pub fn fit_svr(x: ArrayView2<f64>, target: &[f64], c: f64, gamma: f64, epsilon: f64) -> Result<KernelMachine> {
    check_xy(&x, target.len())?;
    check_params(c, gamma)?;
    if !(epsilon >= 0.0) {
        return Err(ModelError::InvalidHyperparameter(format!("epsilon {epsilon}")));
    }
    let n = target.len();
    let y: Vec<f64> = (0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect();
    let p: Vec<f64> = (0..2 * n).map(|i| if i < n { epsilon - target[i] } else { epsilon + target[i - n] }).collect();
    let mut kernel = KernelCache::new(x, gamma);
    let sol = smo(&mut kernel, &y, &p, c, KKT_TOL)?;
    let coef: Vec<f64> = (0..n).map(|i| sol.alpha[i] - sol.alpha[i + n]).collect();
    Ok(KernelMachine::from_dual(&x, coef, &sol, gamma))
}

/// Binary machine for labels `±1`.
pub fn fit_svc_binary(x: ArrayView2<f64>, y: &[f64], c: f64, gamma: f64) -> Result<KernelMachine> {
    check_xy(&x, y.len())?;
    check_params(c, gamma)?;
    let p = vec![-1.0; y.len()];
    let mut kernel = KernelCache::new(x, gamma);
    let sol = smo(&mut kernel, y, &p, c, KKT_TOL)?;
    let coef: Vec<f64> = sol.alpha.iter().zip(y).map(|(a, yi)| a * yi).collect();
    Ok(KernelMachine::from_dual(&x, coef, &sol, gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Svm {
    Svr(KernelMachine),
    /// One machine per class; `None` for a class absent from training.
    Svc(Vec<Option<KernelMachine>>),
}

impl Svm {
    pub fn fit_classifier(x: ArrayView2<f64>, labels: &[usize], n_classes: usize, c: f64, gamma: f64) -> Result<Self> {
        let machines = (0..n_classes)
            .map(|k| {
                if !labels.contains(&k) {
                    return Ok(None);
                }
                let y: Vec<f64> = labels.iter().map(|&l| if l == k { 1.0 } else { -1.0 }).collect();
                fit_svc_binary(x, &y, c, gamma).map(Some)
            })
            .collect::<Result<_>>()?;
        Ok(Self::Svc(machines))
    }

    fn width(&self) -> usize {
        match self {
            Svm::Svr(m) => m.support.ncols(),
            Svm::Svc(ms) => ms.iter().flatten().map(|m| m.support.ncols()).next().unwrap_or(0),
        }
    }

    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.width(), &x)?;
        match self {
            Svm::Svr(m) => Ok(m.decisions(x)),
            Svm::Svc(_) => Err(ModelError::WrongTask { fitted: "classification", asked: "regression" }),
        }
    }

    /// Class with the largest decision value; ties go to the lower class.
    pub fn predict_classes(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        check_width(self.width(), &x)?;
        let Svm::Svc(machines) = self else {
            return Err(ModelError::WrongTask { fitted: "regression", asked: "classification" });
        };
        let scores: Vec<Vec<f64>> = machines
            .iter()
            .map(|m| m.as_ref().map_or_else(|| vec![f64::NEG_INFINITY; x.nrows()], |m| m.decisions(x)))
            .collect();
        Ok((0..x.nrows())
            .map(|i| (0..scores.len()).fold(0, |b, k| if scores[k][i] > scores[b][i] { k } else { b }))
            .collect())
    }
}
