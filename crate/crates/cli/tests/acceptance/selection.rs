use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadrough_models::forest::{ForestParams, RandomForest, Targets};
use roadrough_selection::pca::{covariance, pca_fit};
use roadrough_selection::sfs::{sfs_forward, SfsConfig};

use crate::oracle::uniform_matrix;
use crate::{ensure, Outcome};

const SFS_TOL: f64 = 1e-12;
const ORTHONORMAL_TOL: f64 = 1e-8;
const RATIO_TOL: f64 = 1e-9;
const KEPT_TARGET: f64 = 0.99;

/// k contiguous blocks; round i trains on blocks 0..=i.
fn oracle_score(x: &Array2<f64>, y: &[f64], cols: &[usize], c: &SfsConfig) -> f64 {
    let n = y.len();
    let k = c.k_folds;
    let bounds: Vec<usize> = (0..=k).map(|b| (0..b).map(|i| n / k + usize::from(i < n % k)).sum()).collect();
    let sub = x.select(Axis(1), cols);
    let params = ForestParams {
        n_trees: c.n_trees,
        max_depth: c.max_depth,
        max_features: ((cols.len() as f64).sqrt() as usize).max(1),
        bootstrap: true,
        seed: c.seed,
    };
    let mut total = 0.0;
    for i in 0..k - 1 {
        let (tr, va) = (0..bounds[i + 1], bounds[i + 1]..bounds[i + 2]);
        let f = RandomForest::fit(sub.slice(ndarray::s![tr.clone(), ..]), Targets::Values(&y[tr]), &params).unwrap();
        let p = f.predict_values(sub.slice(ndarray::s![va.clone(), ..])).unwrap();
        total += (va.clone().zip(&p).map(|(j, q)| (y[j] - q).powi(2)).sum::<f64>() / va.len() as f64).sqrt();
    }
    total / (k - 1) as f64
}

fn sfs() -> Result<usize, String> {
    let c = SfsConfig { k_folds: 4, max_features: 3, n_trees: 20, max_depth: 6, seed: 3 };
    for seed in 0..5 {
        let x = uniform_matrix(10 + seed, 100, 3);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.rows().into_iter().map(|row| row[0] * row[1] + 0.5 * row[2] + 0.3 * r.random_range(-1.0..1.0)).collect();
        let res = sfs_forward(x.view(), &y, &c).unwrap();

        let mut chosen: Vec<usize> = Vec::new();
        let mut curve = Vec::new();
        for _ in 0..3 {
            let mut best: Option<(f64, usize)> = None;
            for j in (0..3).filter(|j| !chosen.contains(j)) {
                let mut cols = chosen.clone();
                cols.push(j);
                let s = oracle_score(&x, &y, &cols, &c);
                if best.is_none_or(|(b, _)| s < b) {
                    best = Some((s, j));
                }
            }
            let (s, j) = best.unwrap();
            chosen.push(j);
            curve.push(s);
        }
        ensure(res.order == chosen, || format!("seed {seed}: order {:?} vs {chosen:?}", res.order))?;
        for (a, b) in res.cv_rmse.iter().zip(&curve) {
            ensure((a - b).abs() <= SFS_TOL, || format!("seed {seed}: curve {a} vs {b}"))?;
        }
    }
    Ok(5)
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
fn jacobi_eigenvalues(mut a: Array2<f64>) -> Vec<f64> {
    let d = a.nrows();
    for _ in 0..100 {
        let off: f64 = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[[i, j]].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let (akp, akq) = (a[[k, p]], a[[k, q]]);
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..d {
                    let (apk, aqk) = (a[[p, k]], a[[q, k]]);
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..d).map(|i| a[[i, i]]).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn correlated(seed: u64, n: usize, d: usize) -> Array2<f64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let latent = Array2::from_shape_simple_fn((n, 3), || r.random_range(-1.0..1.0));
    let mix = Array2::from_shape_simple_fn((3, d), || r.random_range(-2.0..2.0));
    latent.dot(&mix) + Array2::from_shape_simple_fn((n, d), || 0.05 * r.random_range(-1.0..1.0))
}

fn pca() -> Result<(f64, f64), String> {
    let (mut worst_gram, mut worst_ratio): (f64, f64) = (0.0, 0.0);
    for seed in 0..20 {
        let d = 2 + (seed as usize % 7);
        let x = correlated(seed, 200, d);
        let basis = pca_fit(x.view(), KEPT_TARGET).unwrap();
        ensure(basis.kept_ratio() >= KEPT_TARGET, || format!("seed {seed}: kept {}", basis.kept_ratio()))?;
        let m = basis.n_components();
        let gram = basis.components.t().dot(&basis.components);
        for i in 0..m {
            for j in 0..m {
                worst_gram = worst_gram.max((gram[[i, j]] - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let ev = jacobi_eigenvalues(covariance(x.view()));
        let total: f64 = ev.iter().sum();
        for (r, e) in basis.ratios.iter().zip(&ev) {
            worst_ratio = worst_ratio.max((r - e / total).abs());
        }
    }
    ensure(worst_gram <= ORTHONORMAL_TOL, || format!("components off orthonormal by {worst_gram:e}"))?;
    ensure(worst_ratio <= RATIO_TOL, || format!("eigenvalue ratios off by {worst_ratio:e}"))?;
    Ok((worst_gram, worst_ratio))
}

pub fn check() -> Outcome {
    let sfs = sfs()?;
    let (gram, ratio) = pca()?;
    Ok(format!("{sfs} SFS instances equal greedy oracle, orthonormality {gram:.1e}, ratio error {ratio:.1e}"))
}
