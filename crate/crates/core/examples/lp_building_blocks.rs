//! The solver layer on its own: a small LP through the simplex backend,
//! nonnegative least squares and nonnegative L1 regression.

use hottopixx::linalg::{reduced_svd, DenseMatrix};
use hottopixx::solvers::{solve_l1_regression_nonneg, solve_lp_simplex, solve_nnls, LinearProgram, Sense, SimplexOptions};

fn main() -> hottopixx::Result<()> {
    // max x + y  s.t.  x + 2y <= 4,  3x + y <= 6
    let mut lp = LinearProgram::new(2);
    lp.objective = vec![-1.0, -1.0];
    lp.add_row(&[(0, 1.0), (1, 2.0)], Sense::Le, 4.0);
    lp.add_row(&[(0, 3.0), (1, 1.0)], Sense::Le, 6.0);
    let sol = solve_lp_simplex(&lp, &SimplexOptions::default())?.into_optimal()?;
    println!("LP: x = {:?}, objective {}", sol.x, -sol.objective);

    let b = DenseMatrix::from_rows(&[&[1.0, 0.0, 1.0], &[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0]])?;
    let c = [2.0, -1.0, 0.5];
    let nnls = solve_nnls(&b, &c, 1e-12)?;
    println!("NNLS: x = {:?}, residual^2 {:.4}", nnls.x, nnls.residual_sq);
    let (z, val) = solve_l1_regression_nonneg(&b, &c)?;
    println!("L1:   z = {:?}, residual {:.4}", z, val);

    let svd = reduced_svd(&b)?;
    println!("singular values {:?}, condition {:.3}", svd.sigma, svd.condition_ratio());
    Ok(())
}
