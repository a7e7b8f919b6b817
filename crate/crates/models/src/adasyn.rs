//! Adaptive synthetic oversampling of minority classes.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_xy, ModelError, Result};

pub const DEFAULT_K: usize = 5;

/// The `k` rows of `pool` nearest to `q`, skipping `skip`; ties go to the
/// lower index.
fn nearest(x: &ArrayView2<f64>, pool: &[usize], q: ArrayView1<f64>, skip: usize, k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = pool
        .iter()
        .filter(|&&i| i != skip)
        .map(|&i| (x.row(i).iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, i)| i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub x: Array2<f64>,
    pub labels: Vec<usize>,
    /// For each appended row, the (seed row, neighbour row, u) it came from.
    pub origin: Vec<(usize, usize, f64)>,
}

/// Append synthetic rows so every class approaches the majority count.
///
/// Each minority class needs `G = majority − count` new rows. Row `i` gets
/// `rint(rᵢ/Σr · G)` of them, where `rᵢ` is the share of other classes among
/// its `k` nearest rows in the whole set (uniform when every `rᵢ` is zero).
/// A synthetic row is `xᵢ + u·(x_nb − xᵢ)` with `x_nb` one of the `k` nearest
/// same-class rows and `u ~ U[0, 1)`.
pub fn adasyn_resample(x: ArrayView2<f64>, labels: &[usize], n_classes: usize, k: usize, seed: u64) -> Result<Synthetic> {
    check_xy(&x, labels.len())?;
    if k == 0 {
        return Err(ModelError::InvalidHyperparameter("ADASYN k must be positive".into()));
    }
    let mut members = vec![Vec::new(); n_classes];
    for (i, &c) in labels.iter().enumerate() {
        if c >= n_classes {
            return Err(ModelError::InvalidInput(format!("label {c} outside 0..{n_classes}")));
        }
        members[c].push(i);
    }
    if members.iter().filter(|m| !m.is_empty()).count() < 2 {
        return Err(ModelError::InvalidInput("ADASYN needs at least two classes".into()));
    }
    let majority = members.iter().map(Vec::len).max().unwrap_or(0);
    let all: Vec<usize> = (0..labels.len()).collect();
    let k_all = k.min(labels.len() - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_rows: Vec<f64> = Vec::new();
    let mut new_labels = Vec::new();
    let mut origin = Vec::new();

    for (c, rows) in members.iter().enumerate() {
        if rows.is_empty() || rows.len() >= majority {
            continue;
        }
        let needed = (majority - rows.len()) as f64;
        let hardness: Vec<f64> = rows
            .iter()
            .map(|&i| {
                let nb = nearest(&x, &all, x.row(i), i, k_all);
                nb.iter().filter(|&&j| labels[j] != c).count() as f64 / k_all as f64
            })
            .collect();
        let total: f64 = hardness.iter().sum();
        let share: Vec<f64> = if total > 0.0 {
            hardness.iter().map(|r| r / total).collect()
        } else {
            vec![1.0 / rows.len() as f64; rows.len()]
        };
        let k_c = k.min(rows.len() - 1);
        if k_c < k {
            log::warn!("class {c} has {} rows; ADASYN uses {k_c} same-class neighbours", rows.len());
        }
        for (&i, s) in rows.iter().zip(&share) {
            let g = (s * needed).round_ties_even() as usize;
            if g == 0 {
                continue;
            }
            let nb = nearest(&x, rows, x.row(i), i, k_c);
            for _ in 0..g {
                let j = if nb.is_empty() { i } else { nb[rng.random_range(0..nb.len())] };
                let u: f64 = rng.random();
                new_rows.extend(x.row(i).iter().zip(x.row(j).iter()).map(|(a, b)| a + u * (b - a)));
                new_labels.push(c);
                origin.push((i, j, u));
            }
        }
    }

    let extra = Array2::from_shape_vec((new_labels.len(), x.ncols()), new_rows).expect("row-major buffer");
    let x_out = ndarray::concatenate(Axis(0), &[x, extra.view()]).expect("matching widths");
    let mut labels_out = labels.to_vec();
    labels_out.extend(new_labels);
    Ok(Synthetic { x: x_out, labels: labels_out, origin })
}
