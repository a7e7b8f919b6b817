//! CART trees and bagged random forests.
//!
//! Splits are exact: every threshold between distinct neighbouring values of
//! every candidate feature is scored. Rows are kept presorted per feature and
//! partitioned stably down the tree, so a level costs O(rows × features).

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_width, check_xy, ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeKind {
    Regression,
    Classification { n_classes: usize },
}

#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Values(&'a [f64]),
    Classes { labels: &'a [usize], n_classes: usize },
}

impl Targets<'_> {
    fn len(&self) -> usize {
        match self {
            Targets::Values(v) => v.len(),
            Targets::Classes { labels, .. } => labels.len(),
        }
    }

    fn kind(&self) -> TreeKind {
        match self {
            Targets::Values(_) => TreeKind::Regression,
            Targets::Classes { n_classes, .. } => TreeKind::Classification { n_classes: *n_classes },
        }
    }

    /// Width of the per-node statistics vector.
    fn stat_len(&self) -> usize {
        match self {
            Targets::Values(_) => 2,
            Targets::Classes { n_classes, .. } => *n_classes,
        }
    }

    fn accumulate(&self, stats: &mut [f64], row: usize, w: f64) {
        match self {
            Targets::Values(y) => {
                stats[0] += w * y[row];
                stats[1] += w * y[row] * y[row];
            }
            Targets::Classes { labels, .. } => stats[labels[row]] += w,
        }
    }

    /// Larger is purer: `S²/W` for regression, `Σc²/W` for Gini.
    fn purity(&self, stats: &[f64], w: f64) -> f64 {
        match self {
            Targets::Values(_) => stats[0] * stats[0] / w,
            Targets::Classes { .. } => stats.iter().map(|c| c * c).sum::<f64>() / w,
        }
    }

    fn is_pure(&self, stats: &[f64], w: f64) -> bool {
        match self {
            Targets::Values(_) => stats[1] - stats[0] * stats[0] / w <= 1e-12 * stats[1].abs().max(1e-300),
            Targets::Classes { .. } => stats.iter().filter(|&&c| c > 0.0).count() <= 1,
        }
    }

    fn leaf(&self, stats: &[f64], w: f64) -> Vec<f64> {
        match self {
            Targets::Values(_) => vec![stats[0] / w],
            Targets::Classes { .. } => stats.to_vec(),
        }
    }
}

/// Gini impurity of a class-count vector.
pub fn gini(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    1.0 - counts.iter().map(|c| (c / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    /// Mean target (regression) or weighted class counts.
    Leaf(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn leaf_for(&self, row: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf(v) => return v,
            }
        }
    }

    pub fn predict_value(&self, row: &[f64]) -> f64 {
        self.leaf_for(row)[0]
    }

    pub fn predict_class(&self, row: &[f64]) -> usize {
        argmax(self.leaf_for(row))
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf(_) => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, j| if v[j] > v[b] { j } else { b })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Features drawn at random for every split.
    pub max_features: usize,
}

/// Shared, read-only view of the training data for growing trees.
pub struct TrainingData<'a> {
    cols: Vec<Vec<f64>>,
    /// Row order sorted by each feature.
    order: Vec<Vec<u32>>,
    targets: Targets<'a>,
}

impl<'a> TrainingData<'a> {
    pub fn new(x: ArrayView2<f64>, targets: Targets<'a>) -> Result<Self> {
        check_xy(&x, targets.len())?;
        let cols: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut o: Vec<u32> = (0..c.len() as u32).collect();
                o.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                o
            })
            .collect();
        Ok(Self { cols, order, targets })
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    /// Grow one tree on rows with positive `weights` (bootstrap counts).
    pub fn grow(&self, weights: &[f64], params: TreeParams, rng: &mut ChaCha8Rng) -> Tree {
        let d = self.n_features();
        let mut sorted: Vec<Vec<u32>> =
            self.order.iter().map(|o| o.iter().copied().filter(|&r| weights[r as usize] > 0.0).collect()).collect();
        let m = sorted[0].len();
        let mut scratch = vec![0u32; m];
        let mut goes_left = vec![false; self.n_rows()];
        let mut features: Vec<usize> = (0..d).collect();
        let k = self.targets.stat_len();
        let mtry = params.max_features.clamp(1, d);

        let mut nodes: Vec<Node> = Vec::new();
        // (node slot, lo, hi, depth)
        let mut stack = vec![(0usize, 0usize, m, 0usize)];
        nodes.push(Node::Leaf(Vec::new()));
        while let Some((slot, lo, hi, depth)) = stack.pop() {
            let mut total = vec![0.0; k];
            let mut w_total = 0.0;
            for &r in &sorted[0][lo..hi] {
                let w = weights[r as usize];
                self.targets.accumulate(&mut total, r as usize, w);
                w_total += w;
            }
            let leaf = Node::Leaf(self.targets.leaf(&total, w_total));
            if depth >= params.max_depth || w_total < 2.0 || self.targets.is_pure(&total, w_total) {
                nodes[slot] = leaf;
                continue;
            }

            // partial Fisher-Yates for the candidate features
            for i in 0..mtry {
                let j = rng.random_range(i..d);
                features.swap(i, j);
            }
            let mut cand = features[..mtry].to_vec();
            cand.sort_unstable();

            let parent = self.targets.purity(&total, w_total);
            // gains equal up to roundoff count as ties
            let tie_tol = 1e-12 * parent.abs();
            let mut best: Option<(f64, usize, f64)> = None;
            let mut left = vec![0.0; k];
            let mut right = vec![0.0; k];
            for &f in &cand {
                let col = &self.cols[f];
                let rows = &sorted[f][lo..hi];
                left.iter_mut().for_each(|v| *v = 0.0);
                let mut wl = 0.0;
                for p in 0..rows.len() - 1 {
                    let r = rows[p] as usize;
                    let w = weights[r];
                    self.targets.accumulate(&mut left, r, w);
                    wl += w;
                    let (a, b) = (col[r], col[rows[p + 1] as usize]);
                    if !(b > a) {
                        continue;
                    }
                    for i in 0..k {
                        right[i] = total[i] - left[i];
                    }
                    let gain = self.targets.purity(&left, wl) + self.targets.purity(&right, w_total - wl) - parent;
                    if best.is_none_or(|(g, _, _)| gain > g + tie_tol) {
                        let mut thr = 0.5 * (a + b);
                        if !(thr < b) {
                            thr = a;
                        }
                        best = Some((gain, f, thr));
                    }
                }
            }
            let Some((gain, feature, threshold)) = best else {
                nodes[slot] = leaf;
                continue;
            };
            if !(gain > 1e-12 * parent.abs().max(1e-300)) {
                nodes[slot] = leaf;
                continue;
            }

            let col = &self.cols[feature];
            for &r in &sorted[0][lo..hi] {
                goes_left[r as usize] = col[r as usize] <= threshold;
            }
            let mut n_left = 0;
            for buf in sorted.iter_mut() {
                let range = &mut buf[lo..hi];
                let (mut l, mut r) = (0, 0);
                for idx in 0..range.len() {
                    let row = range[idx];
                    if goes_left[row as usize] {
                        range[l] = row;
                        l += 1;
                    } else {
                        scratch[r] = row;
                        r += 1;
                    }
                }
                range[l..].copy_from_slice(&scratch[..r]);
                n_left = l;
            }
            let (li, ri) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(Vec::new()));
            nodes.push(Node::Leaf(Vec::new()));
            nodes[slot] = Node::Split { feature, threshold, left: li, right: ri };
            stack.push((ri, lo + n_left, hi, depth + 1));
            stack.push((li, lo, lo + n_left, depth + 1));
        }
        Tree { nodes }
    }
}

/// Resolve a `max_features` setting: a count, or `sqrt` of the width.
pub fn resolve_max_features(setting: Option<usize>, d: usize) -> usize {
    setting.unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1)).clamp(1, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub kind: TreeKind,
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    pub fn fit(x: ArrayView2<f64>, targets: Targets, params: &ForestParams) -> Result<Self> {
        Ok(Self::fit_with_oob(x, targets, params)?.0)
    }

    /// Also returns, per training row, the mean prediction of the trees that
    /// did not see it (regression), or `None` when every tree saw it.
    pub fn fit_with_oob(x: ArrayView2<f64>, targets: Targets, params: &ForestParams) -> Result<(Self, Vec<Option<f64>>)> {
        if params.n_trees == 0 || params.max_depth == 0 {
            return Err(ModelError::InvalidHyperparameter(format!("forest {params:?}")));
        }
        if params.max_features == 0 || params.max_features > x.ncols() {
            return Err(ModelError::InvalidHyperparameter(format!(
                "max_features {} with {} features",
                params.max_features,
                x.ncols()
            )));
        }
        let data = TrainingData::new(x, targets)?;
        let n = data.n_rows();
        let tp = TreeParams { max_depth: params.max_depth, max_features: params.max_features };
        let grown: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(t as u64);
                let mut w = vec![0.0; n];
                if params.bootstrap {
                    for _ in 0..n {
                        w[rng.random_range(0..n)] += 1.0;
                    }
                } else {
                    w.fill(1.0);
                }
                (data.grow(&w, tp, &mut rng), w)
            })
            .collect();
        let mut oob_sum = vec![0.0; n];
        let mut oob_count = vec![0usize; n];
        if matches!(targets, Targets::Values(_)) {
            for (tree, w) in &grown {
                for i in (0..n).filter(|&i| w[i] == 0.0) {
                    let row: Vec<f64> = x.row(i).to_vec();
                    oob_sum[i] += tree.predict_value(&row);
                    oob_count[i] += 1;
                }
            }
        }
        let oob = oob_sum.iter().zip(&oob_count).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect();
        let forest = Self { kind: targets.kind(), n_features: x.ncols(), trees: grown.into_iter().map(|(t, _)| t).collect() };
        Ok((forest, oob))
    }

    pub fn predict_values(&self, x: ArrayView2<f64>) -> Result<Vec<f64>> {
        check_width(self.n_features, &x)?;
        if self.kind != TreeKind::Regression {
            return Err(ModelError::WrongTask { fitted: "classification", asked: "regression" });
        }
        Ok(rows(x)
            .par_iter()
            .map(|r| self.trees.iter().map(|t| t.predict_value(r)).sum::<f64>() / self.trees.len() as f64)
            .collect())
    }

    /// Majority vote over trees; ties go to the lower class.
    pub fn predict_classes(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        check_width(self.n_features, &x)?;
        let TreeKind::Classification { n_classes } = self.kind else {
            return Err(ModelError::WrongTask { fitted: "regression", asked: "classification" });
        };
        Ok(rows(x)
            .par_iter()
            .map(|r| {
                let mut votes = vec![0.0; n_classes];
                for t in &self.trees {
                    votes[t.predict_class(r)] += 1.0;
                }
                argmax(&votes)
            })
            .collect())
    }
}

fn rows(x: ArrayView2<f64>) -> Vec<Vec<f64>> {
    x.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn to_array(rows: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), rows[0].len()), |(i, j)| rows[i][j])
}
