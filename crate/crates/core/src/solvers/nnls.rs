//! Nonnegative least squares, `min ‖Bx - c‖₂` subject to `x >= 0`, by the
//! Lawson-Hanson active-set method.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: Vec<f64>,
    /// `‖Bx - c‖₂²`
    pub residual_sq: f64,
    pub iterations: usize,
}

/// Least squares on the columns `cols` of `b` via Householder QR.
/// Returns coefficients aligned with `cols`.
pub fn least_squares_subset(b: &DenseMatrix, cols: &[usize], c: &[f64]) -> Vec<f64> {
    let m = b.rows();
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<f64>> = cols.iter().map(|&j| b.col(j).to_vec()).collect();
    let mut rhs = c.to_vec();
    let steps = k.min(m);
    for j in 0..steps {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        let reflect = |col: &mut [f64]| {
            let s: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum::<f64>() * 2.0 / vv;
            for (ci, vi) in col[j..].iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        };
        for col in a.iter_mut().skip(j) {
            reflect(col);
        }
        reflect(&mut rhs);
    }
    // Back substitution on the leading triangle; rank-deficient pivots give 0.
    let scale = a.iter().map(|col| col.iter().fold(0.0f64, |s, v| s.max(v.abs()))).fold(0.0, f64::max);
    let mut x = vec![0.0; k];
    for j in (0..steps).rev() {
        let diag = a[j][j];
        if diag.abs() <= scale * 1e-13 {
            continue;
        }
        let mut s = rhs[j];
        for (l, xl) in x.iter().enumerate().take(steps).skip(j + 1) {
            s -= a[l][j] * xl;
        }
        x[j] = s / diag;
    }
    x
}

fn residual_sq(b: &DenseMatrix, x: &[f64], c: &[f64]) -> f64 {
    let bx = b.mul_vec(x).expect("length checked by caller");
    bx.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// On return the gradient `Bᵀ(Bx - c)` is within `tol` of the KKT conditions
/// (scaled by the data magnitude).
pub fn solve_nnls(b: &DenseMatrix, c: &[f64], tol: f64) -> Result<NnlsSolution> {
    let (m, n) = b.shape();
    if c.len() != m {
        return Err(Error::Dimension(format!("rhs has length {}, matrix has {m} rows", c.len())));
    }
    let max_iter = 3 * n.max(1) + 30;
    let tol = tol * (1.0 + b.max_abs()) * (1.0 + c.iter().fold(0.0f64, |s, v| s.max(v.abs())));
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let mut iterations = 0;
    loop {
        let r: Vec<f64> = {
            let bx = b.mul_vec(&x)?;
            c.iter().zip(&bx).map(|(ci, bi)| ci - bi).collect()
        };
        let w: Vec<f64> = (0..n).map(|j| crate::linalg::dot(b.col(j), &r)).collect();
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)));
        let Some(t) = candidate else { break };
        if iterations >= max_iter {
            return Err(Error::IterLimit(iterations));
        }
        iterations += 1;
        passive[t] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z_sub = least_squares_subset(b, &cols, c);
            if z_sub.iter().all(|&v| v > 0.0) {
                for (&j, &v) in cols.iter().zip(&z_sub) {
                    x[j] = v;
                }
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for (&j, &zj) in cols.iter().zip(&z_sub) {
                if zj <= 0.0 {
                    let denom = x[j] - zj;
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            for (&j, &zj) in cols.iter().zip(&z_sub) {
                x[j] += alpha * (zj - x[j]);
                if x[j] <= tol {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let residual_sq = residual_sq(b, &x, c);
    Ok(NnlsSolution { x, residual_sq, iterations })
}
