//! Monotone gradient descent for smooth convex objectives.

use crate::error::{ModelError, Result};

pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Gradient descent with a Barzilai-Borwein trial step and Armijo
/// backtracking, so the objective never increases. Stops when the gradient
/// norm falls to `tol`.
pub fn minimize<F>(f: F, x0: Vec<f64>, tol: f64, max_iter: usize, what: &'static str) -> Result<Minimum>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut step = 1.0 / norm(&g).max(1.0);
    for it in 0..max_iter {
        let gn = norm(&g);
        if !fx.is_finite() || !gn.is_finite() {
            return Err(ModelError::Diverged(fx));
        }
        if gn <= tol {
            return Ok(Minimum { x, value: fx, grad_norm: gn, iterations: it });
        }
        let g2 = gn * gn;
        let mut t = step;
        let (x_new, f_new, g_new) = loop {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let (fc, gc) = f(&cand);
            if fc <= fx - 1e-4 * t * g2 {
                break (cand, fc, gc);
            }
            t *= 0.5;
            if t < 1e-20 {
                return Err(ModelError::NotConverged {
                    what,
                    detail: format!("line search failed at gradient norm {gn:.3e}"),
                });
            }
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { t * 2.0 };
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    Err(ModelError::NotConverged { what, detail: format!("gradient norm {:.3e} after {max_iter} iterations", norm(&g)) })
}
