//! Nonnegative L1 regression `min_{z >= 0} ‖c - Bz‖₁` as a small LP.

use super::lp::{LinearProgram, Sense};
use super::simplex::{solve_lp_simplex, SimplexOptions};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Returns the minimizer `z` and the optimal value.
///
/// Variables are `z` (k entries) followed by residual bounds `e` (m entries):
/// `min Σ e` subject to `-e <= c - Bz <= e`.
pub fn solve_l1_regression_nonneg(b: &DenseMatrix, c: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (m, k) = b.shape();
    if c.len() != m {
        return Err(Error::Dimension(format!("rhs has length {}, matrix has {m} rows", c.len())));
    }
    let mut lp = LinearProgram::new(k + m);
    for i in 0..m {
        lp.objective[k + i] = 1.0;
        let mut row: Vec<(usize, f64)> = (0..k).map(|j| (j, b[(i, j)])).collect();
        row.push((k + i, 1.0));
        lp.add_row(&row, Sense::Ge, c[i]);
        row.last_mut().unwrap().1 = -1.0;
        lp.add_row(&row, Sense::Le, c[i]);
    }
    let sol = solve_lp_simplex(&lp, &SimplexOptions::default())?.into_optimal()?;
    let z = sol.x[..k].to_vec();
    let bz = b.mul_vec(&z)?;
    let value = c.iter().zip(&bz).map(|(ci, v)| (ci - v).abs()).sum();
    Ok((z, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::RngStream;

    #[test]
    fn orthogonal_column_gives_unit_value() {
        let b = DenseMatrix::from_rows(&[&[0.0], &[1.0]]).unwrap();
        let (z, v) = solve_l1_regression_nonneg(&b, &[1.0, 0.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(z[0].abs() < 1e-12);
    }

    #[test]
    fn exact_fit_gives_zero() {
        let b = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.5, 0.0], &[3.0, 1.0]]).unwrap();
        let c = b.mul_vec(&[0.4, 1.5]).unwrap();
        let (_, v) = solve_l1_regression_nonneg(&b, &c).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn matches_grid_search_on_random_problems() {
        let mut rng = RngStream::new(5);
        for _ in 0..5 {
            let b = rng.uniform_matrix(5, 2);
            let c: Vec<f64> = (0..5).map(|_| rng.uniform()).collect();
            let (_, v) = solve_l1_regression_nonneg(&b, &c).unwrap();
            let eval = |z0: f64, z1: f64| -> f64 {
                (0..5).map(|i| (c[i] - b[(i, 0)] * z0 - b[(i, 1)] * z1).abs()).sum()
            };
            // Coarse grid, then a fine grid around the coarse winner.
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for a in 0..=200 {
                for bb in 0..=200 {
                    let (z0, z1) = (a as f64 * 0.02, bb as f64 * 0.02);
                    let f = eval(z0, z1);
                    if f < best.0 {
                        best = (f, z0, z1);
                    }
                }
            }
            let (_, c0, c1) = best;
            for a in -200..=200 {
                for bb in -200..=200 {
                    let (z0, z1) = ((c0 + a as f64 * 1e-4).max(0.0), (c1 + bb as f64 * 1e-4).max(0.0));
                    best.0 = best.0.min(eval(z0, z1));
                }
            }
            assert!(v <= best.0 + 1e-12, "lp {v} above grid {}", best.0);
            assert!(best.0 - v < 1e-3, "lp {v} grid {}", best.0);
        }
    }
}
