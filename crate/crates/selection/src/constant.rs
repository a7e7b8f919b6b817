use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Result, SelectionError};

/// Indices of columns that take more than one value.
pub fn varying_columns(x: ArrayView2<f64>) -> Result<Vec<usize>> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(SelectionError::InvalidInput(format!("empty matrix {:?}", x.dim())));
    }
    let kept: Vec<usize> = (0..x.ncols())
        .filter(|&j| {
            let col = x.column(j);
            col.iter().any(|&v| v != col[0])
        })
        .collect();
    if kept.is_empty() {
        return Err(SelectionError::AllConstant);
    }
    Ok(kept)
}

/// Remove constant columns; the kept indices re-apply the rule to other rows.
pub fn drop_constant(x: ArrayView2<f64>) -> Result<(Array2<f64>, Vec<usize>)> {
    let kept = varying_columns(x)?;
    Ok((x.select(Axis(1), &kept), kept))
}

/// Exact-duplicate threshold on |correlation|.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// Of the varying columns in `cols`, those that are not an affine copy of an
/// earlier kept one (|correlation| within `DUPLICATE_TOL` of 1).
pub fn distinct_columns(x: ArrayView2<f64>, cols: &[usize]) -> Vec<usize> {
    let centred = |j: usize| -> Vec<f64> {
        let c = x.column(j);
        let m = c.mean().unwrap_or(0.0);
        let v: Vec<f64> = c.iter().map(|&a| a - m).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / norm).collect()
    };
    let mut kept: Vec<(usize, Vec<f64>)> = Vec::new();
    for &j in cols {
        let u = centred(j);
        if !u.iter().all(|a| a.is_finite()) {
            continue;
        }
        let dup = kept.iter().any(|(_, w)| {
            let r: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
            r.abs() >= 1.0 - DUPLICATE_TOL
        });
        if !dup {
            kept.push((j, u));
        }
    }
    kept.into_iter().map(|(j, _)| j).collect()
}
