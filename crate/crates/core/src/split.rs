//! Route-ordered splitting.
//!
//! Adjacent road windows overlap and are strongly correlated, so nothing
//! here shuffles: the holdout is the tail of the route and cross-validation
//! rounds always validate on the block that follows their training blocks.

use std::ops::Range;

use crate::error::{CoreError, Result};
use crate::types::Dataset;

/// Number of leading rows that go to the training side.
///
/// `n * train_frac` rounded half-up, so 5031 rows at 0.8 give 4025/1006.
pub fn split_point(n: usize, train_frac: f64) -> Result<usize> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(CoreError::InvalidInput(format!("train fraction {train_frac} not in (0, 1)")));
    }
    if n == 0 {
        return Err(CoreError::Empty("dataset".into()));
    }
    let cut = (n as f64 * train_frac).round() as usize;
    if cut == 0 || cut >= n {
        return Err(CoreError::InvalidInput(format!(
            "splitting {n} rows at {train_frac} leaves one side empty"
        )));
    }
    Ok(cut)
}

/// Split into a leading training part and a trailing test part.
pub fn ordered_split(dataset: &Dataset, train_frac: f64) -> Result<(Dataset, Dataset)> {
    let cut = split_point(dataset.n_rows(), train_frac)?;
    let train: Vec<usize> = (0..cut).collect();
    let test: Vec<usize> = (cut..dataset.n_rows()).collect();
    Ok((dataset.select_rows(&train), dataset.select_rows(&test)))
}

/// One expanding-window cross-validation round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Range<usize>,
    pub val: Range<usize>,
}

impl Fold {
    pub fn train_indices(&self) -> Vec<usize> {
        self.train.clone().collect()
    }

    pub fn val_indices(&self) -> Vec<usize> {
        self.val.clone().collect()
    }
}

/// Contiguous block boundaries: the first `n % k` blocks get one extra row.
pub fn block_bounds(n: usize, k: usize) -> Vec<Range<usize>> {
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    (0..k)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// `k - 1` rounds over `k` contiguous blocks; round `i` trains on blocks
/// `0..=i` and validates on block `i + 1`.
pub fn ordered_kfold(n: usize, k: usize) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(CoreError::InvalidInput(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(CoreError::InvalidInput(format!("{n} rows cannot fill {k} folds")));
    }
    let blocks = block_bounds(n, k);
    Ok((0..k - 1)
        .map(|i| Fold { train: 0..blocks[i].end, val: blocks[i + 1].clone() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn dataset(n: usize) -> Dataset {
        let x = Array2::from_shape_fn((n, 1), |(i, _)| i as f64);
        Dataset::from_iri(x, (0..n).map(|i| i as f64 * 0.01).collect(), vec!["f".into()]).unwrap()
    }

    #[test]
    fn split_ten_rows() {
        let (tr, te) = ordered_split(&dataset(10), 0.8).unwrap();
        assert_eq!(tr.x.column(0).to_vec(), (0..8).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(te.x.column(0).to_vec(), vec![8.0, 9.0]);
    }

    #[test]
    fn split_matches_reported_segment_counts() {
        assert_eq!(split_point(5031, 0.8).unwrap(), 4025);
    }

    #[test]
    fn split_degenerate() {
        assert!(ordered_split(&dataset(1), 0.8).is_err());
        assert!(split_point(0, 0.8).is_err());
        assert!(split_point(10, 1.0).is_err());
    }

    #[test]
    fn kfold_ten_by_five() {
        let folds = ordered_kfold(10, 5).unwrap();
        let expect = [(0..2, 2..4), (0..4, 4..6), (0..6, 6..8), (0..8, 8..10)];
        assert_eq!(folds.len(), 4);
        for (f, (tr, va)) in folds.iter().zip(expect) {
            assert_eq!(f.train, tr);
            assert_eq!(f.val, va);
        }
    }

    #[test]
    fn kfold_singletons() {
        let folds = ordered_kfold(5, 5).unwrap();
        assert_eq!(folds.len(), 4);
        assert!(folds.iter().all(|f| f.val.len() == 1));
        assert!(ordered_kfold(4, 5).is_err());
        assert!(ordered_kfold(4, 1).is_err());
    }

    proptest! {
        #[test]
        fn kfold_validation_follows_training(k in 2usize..12, extra in 0usize..200) {
            let n = k + extra;
            let folds = ordered_kfold(n, k).unwrap();
            prop_assert_eq!(folds.len(), k - 1);
            let mut seen = vec![false; n];
            for f in &folds {
                prop_assert!(!f.train.is_empty() && !f.val.is_empty());
                prop_assert!(f.train.end <= f.val.start);
                for i in f.val.clone() {
                    prop_assert!(!seen[i]);
                    seen[i] = true;
                }
            }
            let blocks = block_bounds(n, k);
            let covered: usize = seen.iter().filter(|&&s| s).count();
            prop_assert_eq!(covered, n - blocks[0].len());
        }
    }
}
