//! Successive projection algorithm.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};

/// Relative size below which a residual column counts as zero.
const DEGENERATE: f64 = 1e-12;

/// Greedy selection of `r` columns: pick the residual column of largest
/// Euclidean norm (ties to the lower index), then project every residual
/// column onto the orthogonal complement of the pick.
///
/// Returns original indices in selection order.
pub fn spa(a: &DenseMatrix, r: usize) -> Result<Vec<usize>> {
    let n = a.cols();
    if r == 0 || r > n {
        return Err(Error::BadParameter(format!("r = {r} with {n} columns")));
    }
    let mut res = a.clone();
    let norms = |m: &DenseMatrix| -> Vec<f64> { (0..n).map(|j| dot(m.col(j), m.col(j))).collect() };
    let scale = norms(&res).into_iter().fold(0.0, f64::max).sqrt();
    let mut picked = Vec::with_capacity(r);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(r);
    for step in 0..r {
        let sq = norms(&res);
        let best = (0..n).fold(0, |b, j| if sq[j] > sq[b] { j } else { b });
        let len = sq[best].sqrt();
        if scale == 0.0 || len <= DEGENERATE * scale {
            return Err(Error::DegenerateResidual(step));
        }
        let q: Vec<f64> = res.col(best).iter().map(|v| v / len).collect();
        basis.push(q);
        project_out(&mut res, &basis[step..]);
        // Long runs drift from orthogonality; a second sweep over every pick
        // restores it.
        if r > 20 {
            project_out(&mut res, &basis);
        }
        picked.push(best);
    }
    Ok(picked)
}

fn project_out(res: &mut DenseMatrix, qs: &[Vec<f64>]) {
    for q in qs {
        for j in 0..res.cols() {
            let c = dot(q, res.col(j));
            res.col_mut(j).iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{gen_h, gen_w_normal, SyntheticInstance};
    use crate::linalg::RngStream;

    #[test]
    fn identity_in_index_order() {
        assert_eq!(spa(&DenseMatrix::identity(3), 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn hand_computed_two_steps() {
        let a = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.5], &[0.0, 1.0, 0.5]]).unwrap();
        assert_eq!(spa(&a, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn rank_one_data_is_degenerate() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(spa(&a, 2), Err(Error::DegenerateResidual(1))));
        assert!(matches!(spa(&DenseMatrix::zeros(2, 2), 1), Err(Error::DegenerateResidual(0))));
    }

    #[test]
    fn recovers_noiseless_basis() {
        for seed in 0..20 {
            let mut rng = RngStream::new(seed);
            let w = gen_w_normal(8, 4, &mut rng).unwrap();
            let (h, _) = gen_h(4, 20, &mut rng).unwrap();
            let perm = rng.permutation(20);
            let inst = SyntheticInstance::assemble(w, h, perm, DenseMatrix::zeros(8, 20), 0.0, seed).unwrap();
            let mut j = spa(&inst.a, 4).unwrap();
            j.sort_unstable();
            assert_eq!(j, inst.basis, "seed {seed}");
        }
    }

    #[test]
    fn long_runs_pick_distinct_columns() {
        let mut rng = RngStream::new(4);
        let a = rng.normal_matrix(30, 40);
        let j = spa(&a, 25).unwrap();
        let mut s = j.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 25);
    }
}
