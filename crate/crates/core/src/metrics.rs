//! Evaluation metrics for the regression and classification tasks.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::types::IriLevel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub r2: f64,
    pub mae: f64,
    pub rmse: f64,
    /// Mean of |y - ŷ| / y.
    pub mre: f64,
}

/// Mean squared error.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_lengths(y.len(), yhat.len())?;
    if y.is_empty() {
        return Err(CoreError::Empty("targets".into()));
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64)
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    mse(y, yhat).map(f64::sqrt)
}

/// R², MAE, RMSE and MRE of a prediction.
///
/// R² is taken against the mean of the evaluated targets themselves, so a
/// constant predictor fitted elsewhere can score below zero.
pub fn regression_metrics(y: &[f64], yhat: &[f64]) -> Result<RegressionMetrics> {
    check_lengths(y.len(), yhat.len())?;
    if y.len() < 2 {
        return Err(CoreError::InvalidInput(format!("need at least 2 targets, got {}", y.len())));
    }
    if let Some(i) = y.iter().position(|&v| v == 0.0) {
        return Err(CoreError::InvalidInput(format!("relative error undefined: target {i} is zero")));
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(CoreError::InvalidInput("R² undefined: targets are constant".into()));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    let mae = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / n;
    let mre = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).abs()).sum::<f64>() / n;
    Ok(RegressionMetrics { r2: 1.0 - ss_res / ss_tot, mae, rmse: (ss_res / n).sqrt(), mre })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Unweighted mean over classes.
    #[default]
    Macro,
    /// Mean weighted by true-class support.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Counts matrix: entry `[i][j]` is the number of true class `i` predicted as `j`.
pub fn confusion_counts(y: &[usize], yhat: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    check_lengths(y.len(), yhat.len())?;
    let mut m = vec![vec![0usize; n_classes]; n_classes];
    for (&a, &b) in y.iter().zip(yhat) {
        if a >= n_classes || b >= n_classes {
            return Err(CoreError::InvalidInput(format!("class label outside 0..{n_classes}")));
        }
        m[a][b] += 1;
    }
    Ok(m)
}

pub fn confusion_matrix(y: &[IriLevel], yhat: &[IriLevel]) -> Result<Vec<Vec<usize>>> {
    let a: Vec<usize> = y.iter().map(|l| l.index()).collect();
    let b: Vec<usize> = yhat.iter().map(|l| l.index()).collect();
    confusion_counts(&a, &b, IriLevel::COUNT)
}

/// Per-class (precision, recall, f1) read off a confusion matrix.
///
/// Zero denominators give 0, so a class absent from both truth and
/// prediction scores 0 on every measure.
pub fn per_class_scores(confusion: &[Vec<usize>]) -> Vec<(f64, f64, f64)> {
    let n = confusion.len();
    (0..n)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: usize = (0..n).map(|r| confusion[r][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            let p = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
            let r = if actual > 0 { tp / actual as f64 } else { 0.0 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            (p, r, f)
        })
        .collect()
}

pub fn classification_scores(
    y: &[usize],
    yhat: &[usize],
    n_classes: usize,
    averaging: Averaging,
) -> Result<ClassificationMetrics> {
    if y.is_empty() {
        return Err(CoreError::Empty("labels".into()));
    }
    let cm = confusion_counts(y, yhat, n_classes)?;
    let scores = per_class_scores(&cm);
    let weights: Vec<f64> = match averaging {
        Averaging::Macro => vec![1.0 / n_classes as f64; n_classes],
        Averaging::Weighted => cm.iter().map(|row| row.iter().sum::<usize>() as f64 / y.len() as f64).collect(),
    };
    let avg = |pick: fn(&(f64, f64, f64)) -> f64| scores.iter().zip(&weights).map(|(s, w)| w * pick(s)).sum();
    Ok(ClassificationMetrics { precision: avg(|s| s.0), recall: avg(|s| s.1), f1: avg(|s| s.2) })
}

/// Macro-averaged precision, recall and F1 over the three IRI levels.
pub fn classification_metrics(y: &[IriLevel], yhat: &[IriLevel]) -> Result<ClassificationMetrics> {
    let a: Vec<usize> = y.iter().map(|l| l.index()).collect();
    let b: Vec<usize> = yhat.iter().map(|l| l.index()).collect();
    classification_scores(&a, &b, IriLevel::COUNT, Averaging::Macro)
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(CoreError::LengthMismatch { left, right });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use IriLevel::*;

    #[test]
    fn perfect_regression() {
        let m = regression_metrics(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!((m.r2, m.mae, m.rmse, m.mre), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn regression_substitution() {
        let m = regression_metrics(&[1.0, 2.0], &[2.0, 2.0]).unwrap();
        assert!((m.rmse - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((m.mae - 0.5).abs() < 1e-15);
        assert!((m.mre - 0.5).abs() < 1e-15);
        assert!((m.r2 - (1.0 - 1.0 / 0.5)).abs() < 1e-15);
    }

    #[test]
    fn constant_train_mean_can_go_negative() {
        let test = [1.0, 1.2, 1.4, 1.1, 1.3];
        let m = regression_metrics(&test, &[1.5; 5]).unwrap();
        assert!(m.r2 < 0.0);
    }

    #[test]
    fn regression_errors() {
        assert!(matches!(regression_metrics(&[1.0, 2.0], &[1.0]), Err(CoreError::LengthMismatch { .. })));
        assert!(regression_metrics(&[0.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(regression_metrics(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn perfect_classification() {
        let y = [Low, Medium, High, Low];
        let m = classification_metrics(&y, &y).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    /// Brute-force count of tp/fp/fn per class straight from the label lists.
    fn oracle(y: &[IriLevel], yhat: &[IriLevel]) -> (f64, f64, f64) {
        let mut sums = (0.0, 0.0, 0.0);
        for c in IriLevel::ALL {
            let tp = y.iter().zip(yhat).filter(|(a, b)| **a == c && **b == c).count() as f64;
            let fp = y.iter().zip(yhat).filter(|(a, b)| **a != c && **b == c).count() as f64;
            let fnn = y.iter().zip(yhat).filter(|(a, b)| **a == c && **b != c).count() as f64;
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fnn > 0.0 { tp / (tp + fnn) } else { 0.0 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            sums = (sums.0 + p, sums.1 + r, sums.2 + f);
        }
        (sums.0 / 3.0, sums.1 / 3.0, sums.2 / 3.0)
    }

    #[test]
    fn all_low_predictor() {
        let y = [Low, Low, Medium, Medium, High, High];
        let yhat = [Low; 6];
        let m = classification_metrics(&y, &yhat).unwrap();
        let (p, r, f) = oracle(&y, &yhat);
        // Low: p = 2/6, r = 1, f1 = 0.5; other classes contribute 0.
        assert!((p - 1.0 / 9.0).abs() < 1e-15);
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert!((f - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.precision - p).abs() < 1e-15);
        assert!((m.recall - r).abs() < 1e-15);
        assert!((m.f1 - f).abs() < 1e-15);
    }

    #[test]
    fn majority_predictor_with_one_third_share() {
        // 1/3 share per class, always predict the majority (ties → Low).
        let y: Vec<IriLevel> = (0..9).map(|i| IriLevel::from_index(i % 3).unwrap()).collect();
        let yhat = vec![Low; 9];
        let m = classification_metrics(&y, &yhat).unwrap();
        let (_, _, f) = oracle(&y, &yhat);
        assert!((m.f1 - f).abs() < 1e-15);
        assert!((m.f1 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_average_uses_support() {
        let y = [0, 0, 0, 1];
        let yhat = [0, 0, 0, 0];
        let m = classification_scores(&y, &yhat, 2, Averaging::Weighted).unwrap();
        // class 0: p = 0.75, r = 1; class 1: zeros.
        assert!((m.precision - 0.75 * 0.75).abs() < 1e-15);
        assert!((m.recall - 0.75).abs() < 1e-15);
    }

    #[test]
    fn confusion_shapes() {
        let cm = confusion_matrix(&[Low, Medium], &[Medium, Low]).unwrap();
        assert_eq!(cm, vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]);
        let y = [Low, High, High];
        let cm = confusion_matrix(&y, &y).unwrap();
        assert_eq!(cm, vec![vec![1, 0, 0], vec![0, 0, 0], vec![0, 0, 2]]);
        assert!(confusion_matrix(&y, &y[..2]).is_err());
    }

    fn level() -> impl Strategy<Value = IriLevel> {
        (0usize..3).prop_map(|i| IriLevel::from_index(i).unwrap())
    }

    proptest! {
        #[test]
        fn confusion_and_macro_f1_agree(pairs in prop::collection::vec((level(), level()), 1..60)) {
            let (y, yhat): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
            let cm = confusion_matrix(&y, &yhat).unwrap();
            let total: usize = cm.iter().flatten().sum();
            prop_assert_eq!(total, y.len());
            for c in IriLevel::ALL {
                let support = y.iter().filter(|&&l| l == c).count();
                prop_assert_eq!(cm[c.index()].iter().sum::<usize>(), support);
            }
            let m = classification_metrics(&y, &yhat).unwrap();
            let f_cm = per_class_scores(&cm).iter().map(|s| s.2).sum::<f64>() / 3.0;
            prop_assert!((m.f1 - f_cm).abs() < 1e-12);
            let (_, _, f_or) = oracle(&y, &yhat);
            prop_assert!((m.f1 - f_or).abs() < 1e-12);
        }

        #[test]
        fn regression_invariants(y in prop::collection::vec(0.1f64..5.0, 2..40), noise in prop::collection::vec(-1.0f64..1.0, 40)) {
            prop_assume!(y.iter().any(|v| (v - y[0]).abs() > 1e-6));
            let yhat: Vec<f64> = y.iter().zip(&noise).map(|(a, e)| a + e).collect();
            let m = regression_metrics(&y, &yhat).unwrap();
            prop_assert!(m.mae <= m.rmse + 1e-15);
            prop_assert!((m.rmse.powi(2) - mse(&y, &yhat).unwrap()).abs() < 1e-12);
            let perfect = regression_metrics(&y, &y).unwrap();
            prop_assert_eq!(perfect.r2, 1.0);
        }

        #[test]
        fn level_is_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(crate::to_iri_level(lo).unwrap() <= crate::to_iri_level(hi).unwrap());
        }
    }
}
