//! Reduced singular value decomposition by one-sided (Hestenes) Jacobi rotations.

use super::matrix::{dot, norm2, DenseMatrix};
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// `M = F · diag(sigma) · Gᵀ` with `F` (m×n) orthonormal columns and `G` (n×n) orthogonal.
#[derive(Debug, Clone)]
pub struct Svd {
    pub f: DenseMatrix,
    pub sigma: Vec<f64>,
    pub g: DenseMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut fs = self.f.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            fs.col_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        fs.matmul(&self.g.transpose()).expect("svd factors are conformant")
    }

    /// `sigma_max / sigma_min`; infinite when the smallest singular value is zero.
    pub fn condition_ratio(&self) -> f64 {
        let max = self.sigma.first().copied().unwrap_or(0.0);
        let min = self.sigma.last().copied().unwrap_or(0.0);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

pub fn reduced_svd(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::Dimension(format!("reduced_svd needs rows >= cols, got {rows}x{cols}")));
    }
    let mut u = m.clone();
    let mut v = DenseMatrix::identity(cols);
    let eps = f64::EPSILON;

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(u.col(p), u.col(p));
                let beta = dot(u.col(q), u.col(q));
                let gamma = dot(u.col(p), u.col(q));
                if gamma == 0.0 || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { what: "jacobi svd", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = (0..cols).map(|j| norm2(u.col(j))).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut f = DenseMatrix::zeros(rows, cols);
    let mut g = DenseMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let mut missing = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        g.col_mut(k).copy_from_slice(v.col(j));
        if s > scale * eps * rows as f64 {
            f.col_mut(k).iter_mut().zip(u.col(j)).for_each(|(d, x)| *d = x / s);
            sigma.push(s);
        } else {
            sigma.push(0.0);
            missing.push(k);
        }
    }
    for k in missing {
        complete_orthonormal(&mut f, k);
    }
    Ok(Svd { f, sigma, g })
}

fn rotate(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    for i in 0..rows {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = c * a - s * b;
        m[(i, q)] = s * a + c * b;
    }
}

// Fills column k with a unit vector orthogonal to every other nonzero column.
fn complete_orthonormal(f: &mut DenseMatrix, k: usize) {
    let rows = f.rows();
    for e in 0..rows {
        let mut cand = vec![0.0; rows];
        cand[e] = 1.0;
        for _ in 0..2 {
            for j in 0..f.cols() {
                if j == k {
                    continue;
                }
                let cj = f.col(j).to_vec();
                let proj = dot(&cand, &cj);
                cand.iter_mut().zip(&cj).for_each(|(c, x)| *c -= proj * x);
            }
        }
        let nrm = norm2(&cand);
        if nrm > 1e-8 {
            f.col_mut(k).iter_mut().zip(&cand).for_each(|(d, c)| *d = c / nrm);
            return;
        }
    }
}
