use ndarray::{Array2, ArrayView2};
use rand::Rng;
use roadrough_models::forest::{ForestParams, RandomForest, Targets};
use roadrough_models::linear::LinearModel;
use roadrough_models::logistic::{self, LogisticModel, MultiClass};
use roadrough_models::mlp::{self, MlpTargets};
use roadrough_models::svm::{fit_svr, rbf};

use crate::oracle::*;
use crate::{ensure, Outcome};

const FLOOR: f64 = 1e-3;
const MLP_GRAD_TOL: f64 = 1e-4;
const LOGISTIC_GRAD_TOL: f64 = 1e-5;
const LASSO_TOL: f64 = 1e-4;
const SVR_DUAL_TOL: f64 = 1e-3;
const TREE_TOL: f64 = 1e-12;

fn gradients() -> Result<(f64, f64), String> {
    let mut r = rng(11);
    let x = gaussian_matrix(&mut r, 30, 4);
    let y: Vec<f64> = x.rows().into_iter().map(|row| row[0] - 0.5 * row[2] + 0.3).collect();
    let labels = three_class_labels(&x);
    let hidden = [5, 4];
    let mut worst_mlp: f64 = 0.0;
    for targets in [MlpTargets::Values(&y), MlpTargets::Classes { labels: &labels, n_classes: 3 }] {
        let outputs = if matches!(targets, MlpTargets::Values(_)) { 1 } else { 3 };
        for trial in 0..3 {
            let params: Vec<f64> = (0..mlp::n_params(4, &hidden, outputs)).map(|_| r.random_range(-0.8..0.8)).collect();
            let l2 = 0.3 * trial as f64;
            let (_, analytic) = mlp::objective(x.view(), targets, &hidden, l2, &params);
            let numeric = numeric_gradient(|p| mlp::objective(x.view(), targets, &hidden, l2, p).0, &params, 1e-5);
            worst_mlp = worst_mlp.max(max_rel_error(&analytic, &numeric, FLOOR));
        }
    }
    ensure(worst_mlp <= MLP_GRAD_TOL, || format!("MLP gradient rel error {worst_mlp:e}"))?;

    let mut r = rng(5);
    let x = gaussian_matrix(&mut r, 60, 3);
    let labels = three_class_labels(&x);
    let lambda = 0.05;
    let model = LogisticModel::fit(x.view(), &labels, 3, lambda, MultiClass::Multinomial).unwrap();
    let block = &model.blocks[0];
    let mut params: Vec<f64> = block.w.iter().copied().collect();
    params.extend(block.b.iter());
    let f = |p: &[f64]| logistic::objective(&x.view(), &labels, 3, lambda, p);
    let shifted: Vec<f64> = params.iter().map(|p| p + r.random_range(-0.5..0.5)).collect();
    let mut worst_logistic: f64 = 0.0;
    for point in [&params, &shifted] {
        let (_, analytic) = f(point);
        let numeric = numeric_gradient(|p| f(p).0, point, 1e-5);
        worst_logistic = worst_logistic.max(max_rel_error(&analytic, &numeric, FLOOR));
    }
    ensure(worst_logistic <= LOGISTIC_GRAD_TOL, || format!("logistic gradient rel error {worst_logistic:e}"))?;
    Ok((worst_mlp, worst_logistic))
}

/// Proximal gradient on `(1/2n)‖y − Xθ − b‖² + λ‖θ‖₁`, intercept unpenalized.
fn lasso_oracle(x: ArrayView2<f64>, y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let (n, d) = x.dim();
    let lip = {
        let mut v = vec![1.0; d + 1];
        let mut est = 0.0;
        for _ in 0..200 {
            let xv: Vec<f64> = (0..n).map(|i| (0..d).map(|j| x[[i, j]] * v[j]).sum::<f64>() + v[d]).collect();
            let mut w = vec![0.0; d + 1];
            for i in 0..n {
                for j in 0..d {
                    w[j] += x[[i, j]] * xv[i] / n as f64;
                }
                w[d] += xv[i] / n as f64;
            }
            est = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            v = w.iter().map(|a| a / est).collect();
        }
        est
    };
    let step = 1.0 / lip;
    let mut theta = vec![0.0; d];
    let mut b = 0.0;
    for _ in 0..200_000 {
        let resid: Vec<f64> = (0..n).map(|i| (0..d).map(|j| x[[i, j]] * theta[j]).sum::<f64>() + b - y[i]).collect();
        for j in 0..d {
            let g: f64 = (0..n).map(|i| x[[i, j]] * resid[i]).sum::<f64>() / n as f64;
            let z = theta[j] - step * g;
            theta[j] = z.signum() * (z.abs() - step * lambda).max(0.0);
        }
        b -= step * resid.iter().sum::<f64>() / n as f64;
    }
    (theta, b)
}

fn lasso() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (seed, lambda) in [(21, 0.1), (22, 0.02)] {
        let mut r = rng(seed);
        let x = gaussian_matrix(&mut r, 40, 5);
        let truth = [1.5, 0.0, -0.8, 0.0, 0.05];
        let y: Vec<f64> = x
            .rows()
            .into_iter()
            .map(|row| row.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + 0.4 + 0.1 * r.random_range(-1.0..1.0))
            .collect();
        let fit = LinearModel::fit_lasso(x.view(), &y, lambda).unwrap();
        let (theta, b) = lasso_oracle(x.view(), &y, lambda);
        for (a, o) in fit.coef.iter().chain([&fit.intercept]).zip(theta.iter().chain([&b])) {
            worst = worst.max((a - o).abs());
        }
        // zero lies in the subdifferential
        let n = y.len() as f64;
        let pred = fit.predict(x.view()).unwrap();
        for j in 0..5 {
            let corr: f64 = (0..y.len()).map(|i| x[[i, j]] * (y[i] - pred[i])).sum::<f64>() / n;
            let gap = if fit.coef[j] == 0.0 { (corr.abs() - lambda).max(0.0) } else { (corr - lambda * fit.coef[j].signum()).abs() };
            ensure(gap <= LASSO_TOL, || format!("lambda {lambda}: subgradient gap {gap:e} on coefficient {j}"))?;
        }
    }
    ensure(worst <= LASSO_TOL, || format!("lasso coefficient error {worst:e}"))?;
    Ok(worst)
}

fn svr_dual(k: &Array2<f64>, y: &[f64], eps: f64, a: &[f64]) -> f64 {
    let n = y.len();
    let beta: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
    let quad: f64 = (0..n).map(|i| (0..n).map(|j| beta[i] * k[[i, j]] * beta[j]).sum::<f64>()).sum();
    0.5 * quad + eps * a.iter().sum::<f64>() - y.iter().zip(&beta).map(|(y, b)| y * b).sum::<f64>()
}

/// Projection onto `{0 ≤ a ≤ C, Σ aᵢ − Σ a*ᵢ = 0}` by bisection on the
/// equality multiplier.
fn project(v: &[f64], n: usize, c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> { v.iter().enumerate().map(|(i, &vi)| (vi - if i < n { mu } else { -mu }).clamp(0.0, c)).collect() };
    let balance = |a: &[f64]| a[..n].iter().sum::<f64>() - a[n..].iter().sum::<f64>();
    let (mut lo, mut hi) = (-1e3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn svr() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut r = rng(100 + seed);
        let x = gaussian_matrix(&mut r, 10, 2);
        let y: Vec<f64> = x.rows().into_iter().map(|row| row[0].sin() + 0.5 * row[1] + 0.1 * r.random_range(-1.0..1.0)).collect();
        let (c, gamma, eps) = (1.0 + seed as f64, 0.5, 0.1);
        let model = fit_svr(x.view(), &y, c, gamma, eps).unwrap();
        let n = y.len();
        let k = Array2::from_shape_fn((n, n), |(i, j)| rbf(x.row(i), x.row(j), gamma));
        let mut a = vec![0.0; 2 * n];
        let step = 1.0 / (2.0 * n as f64);
        for _ in 0..100_000 {
            let beta: Vec<f64> = (0..n).map(|i| a[i] - a[i + n]).collect();
            let kb: Vec<f64> = (0..n).map(|i| (0..n).map(|j| k[[i, j]] * beta[j]).sum()).collect();
            let grad: Vec<f64> = (0..2 * n).map(|i| if i < n { kb[i] + eps - y[i] } else { -kb[i - n] + eps + y[i - n] }).collect();
            let v: Vec<f64> = a.iter().zip(&grad).map(|(ai, g)| ai - step * g).collect();
            a = project(&v, n, c);
        }
        let oracle = svr_dual(&k, &y, eps, &a);
        let rel = (model.dual_objective - oracle).abs() / oracle.abs();
        ensure(rel <= SVR_DUAL_TOL, || format!("seed {seed}: dual {} vs oracle {oracle}", model.dual_objective))?;
        worst = worst.max(rel);
    }
    Ok(worst)
}

type Predictor = Box<dyn Fn(&[f64]) -> f64>;

/// Greedy exhaustive split search down to `depth`, returning leaf means.
fn tree_oracle(x: &Array2<f64>, y: &[f64], rows: &[usize], depth: usize) -> Predictor {
    let mean = rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64;
    let sse = |rs: &[usize]| {
        let m = rs.iter().map(|&i| y[i]).sum::<f64>() / rs.len() as f64;
        rs.iter().map(|&i| (y[i] - m).powi(2)).sum::<f64>()
    };
    if depth == 0 || rows.len() < 2 {
        return Box::new(move |_| mean);
    }
    let parent = sse(rows);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.ncols() {
        let mut vals: Vec<f64> = rows.iter().map(|&i| x[[i, f]]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, f]] <= thr);
            let gain = parent - sse(&l) - sse(&r);
            if best.is_none_or(|(g, _, _)| gain > g + 1e-12) {
                best = Some((gain, f, thr));
            }
        }
    }
    match best {
        Some((gain, f, thr)) if gain > 1e-12 => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[[i, f]] <= thr);
            let (lt, rt) = (tree_oracle(x, y, &l, depth - 1), tree_oracle(x, y, &r, depth - 1));
            Box::new(move |q| if q[f] <= thr { lt(q) } else { rt(q) })
        }
        _ => Box::new(move |_| mean),
    }
}

fn tree() -> Result<usize, String> {
    for seed in 0..20 {
        let mut r = rng(seed);
        let x = Array2::from_shape_simple_fn((8, 3), || r.random_range(0.0..10.0));
        let y: Vec<f64> = (0..8).map(|_| r.random_range(0.0..5.0)).collect();
        let params = ForestParams { n_trees: 1, max_depth: 2, max_features: 3, bootstrap: false, seed };
        let forest = RandomForest::fit(x.view(), Targets::Values(&y), &params).unwrap();
        let oracle = tree_oracle(&x, &y, &(0..8).collect::<Vec<_>>(), 2);
        let probe = Array2::from_shape_simple_fn((200, 3), || r.random_range(-1.0..11.0));
        let got = forest.predict_values(probe.view()).unwrap();
        for (row, g) in probe.rows().into_iter().zip(got) {
            let want = oracle(row.as_slice().unwrap());
            ensure((g - want).abs() <= TREE_TOL, || format!("tree seed {seed}: {g} vs {want}"))?;
        }
    }
    Ok(20)
}

pub fn check() -> Outcome {
    let (mlp, logistic) = gradients()?;
    let lasso = lasso()?;
    let svr = svr()?;
    let trees = tree()?;
    Ok(format!(
        "gradient rel error MLP {mlp:.1e} logistic {logistic:.1e}, lasso {lasso:.1e}, SVR dual rel {svr:.1e}, {trees} trees equal oracle"
    ))
}
