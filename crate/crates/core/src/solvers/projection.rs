//! Euclidean projections onto the feasible set of model P,
//! `C = { X : tr X = r, 0 <= X(i,j) <= X(i,i) <= 1 }`.
//!
//! Each row of `X` contributes one independent "cap set"
//! `{ (t, x) : 0 <= x_j <= t <= 1 }` with `t = X(i,i)`. The trace couples the rows
//! only through the diagonal, so the projection onto `C` is the row-wise
//! projection of `Y - λ I` for the scalar `λ` at which the trace equals `r`.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Projects `(y_diag, y_off)` onto `{ 0 <= x_j <= t <= 1 }`. Exact.
pub fn project_row_capset(y_diag: f64, y_off: &[f64]) -> (f64, Vec<f64>) {
    let mut sorted: Vec<f64> = y_off.iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let t = capset_cap(y_diag, &sorted, &prefix_sums(&sorted));
    (t, y_off.iter().map(|&v| v.clamp(0.0, t)).collect())
}

fn prefix_sums(desc: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(desc.len() + 1);
    out.push(0.0);
    let mut s = 0.0;
    for &v in desc {
        s += v;
        out.push(s);
    }
    out
}

/// Optimal cap `t` for a row whose positive off-diagonal targets are `desc`
/// (sorted descending) with prefix sums `pre`.
///
/// For a fixed cap the off-diagonal optimum is `clamp(y_j, 0, t)`, leaving the
/// convex piecewise quadratic `(t - y0)² + Σ_{y_j > t} (t - y_j)²`. Its
/// stationary point on the piece where exactly the `k` largest exceed `t` is
/// `(y0 + top_k) / (k + 1)`; the valid piece is found by binary search and the
/// result clamped to `[0, 1]`.
fn capset_cap(y0: f64, desc: &[f64], pre: &[f64]) -> f64 {
    capset_cap_slope(y0, desc, pre).0
}

/// [`capset_cap`] together with its derivative in `y0` (`1 / (k + 1)` on an
/// interior piece, zero when clamped).
fn capset_cap_slope(y0: f64, desc: &[f64], pre: &[f64]) -> (f64, f64) {
    let m = desc.len();
    let cand = |k: usize| (y0 + pre[k]) / (k as f64 + 1.0);
    // g(k) = cand(k) - desc[k] is nonincreasing in k; stationary piece is the
    // first k with cand(k) >= desc[k] (or k = m).
    let (mut lo, mut hi) = (0usize, m);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cand(mid) >= desc[mid] {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = cand(lo);
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        (t, 1.0 / (lo as f64 + 1.0))
    }
}

struct SortedRows {
    n: usize,
    /// Per row: positive off-diagonal targets sorted descending, then prefix sums.
    desc: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    diag: Vec<f64>,
}

impl SortedRows {
    fn new(y: &DenseMatrix) -> Self {
        let n = y.rows();
        let mut desc = Vec::with_capacity(n);
        let mut pre = Vec::with_capacity(n);
        for i in 0..n {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| y[(i, j)]).filter(|&v| v > 0.0).collect();
            row.sort_unstable_by(|a, b| b.total_cmp(a));
            pre.push(prefix_sums(&row));
            desc.push(row);
        }
        Self { n, desc, pre, diag: y.diagonal() }
    }

    fn caps(&self, shift: f64) -> Vec<f64> {
        (0..self.n).map(|i| capset_cap(self.diag[i] - shift, &self.desc[i], &self.pre[i])).collect()
    }

    /// Trace of the projected caps at `shift` and its derivative in `shift`.
    fn trace_slope(&self, shift: f64) -> (f64, f64) {
        (0..self.n).fold((0.0, 0.0), |(t, s), i| {
            let (c, ds) = capset_cap_slope(self.diag[i] - shift, &self.desc[i], &self.pre[i]);
            (t + c, s - ds)
        })
    }
}

fn assemble(y: &DenseMatrix, caps: &[f64]) -> DenseMatrix {
    let n = y.rows();
    let mut x = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            x[(i, j)] = if i == j { caps[i] } else { y[(i, j)].clamp(0.0, caps[i]) };
        }
    }
    x
}

/// Projection onto the row cap sets alone (model R's feasible set).
pub fn project_capsets(y: &DenseMatrix) -> DenseMatrix {
    let rows = SortedRows::new(y);
    assemble(y, &rows.caps(0.0))
}

/// Exact projection onto `C` by bisection on the trace multiplier.
///
/// `tol` bounds the trace error of the result; `iter_cap` bounds bisection steps.
pub fn project_model_p_feasible(y: &DenseMatrix, r: f64, tol: f64, iter_cap: usize) -> Result<DenseMatrix> {
    let n = check_square(y, r)?;
    let rows = SortedRows::new(y);
    // trace(shift) is continuous, nonincreasing and piecewise linear; at these
    // shifts every cap is 1 (resp. 0). Newton steps on the linear pieces,
    // safeguarded by bisection, reach the root in a few evaluations.
    let spread = n as f64 * y.max_abs() + 2.0;
    let (mut lo, mut hi) = (-spread, spread);
    let mut shift = 0.0;
    let mut ok = false;
    for _ in 0..iter_cap {
        let (tr, slope) = rows.trace_slope(shift);
        if (tr - r).abs() <= tol * 1e-3 || hi - lo <= f64::EPSILON * spread {
            ok = true;
            break;
        }
        if tr > r {
            lo = shift;
        } else {
            hi = shift;
        }
        let newton = if slope < 0.0 { shift + (tr - r) / -slope } else { f64::NAN };
        shift = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    if !ok {
        return Err(Error::IterLimit(iter_cap));
    }
    let mut caps = rows.caps(shift);
    // Caps sitting strictly inside (0, 1) share the multiplier; spread the
    // remaining trace error over them so tr X = r to rounding.
    let tr: f64 = caps.iter().sum();
    let free: Vec<usize> = (0..n).filter(|&i| caps[i] > 0.0 && caps[i] < 1.0).collect();
    if !free.is_empty() && tr != r {
        let adj = (r - tr) / free.len() as f64;
        for &i in &free {
            caps[i] = (caps[i] + adj).clamp(0.0, 1.0);
        }
    }
    let x = assemble(y, &caps);
    if (x.trace() - r).abs() > tol {
        return Err(Error::IterLimit(iter_cap));
    }
    Ok(x)
}

/// Dykstra alternation between the row cap sets and the trace hyperplane.
///
/// Converges to the same point as [`project_model_p_feasible`]; kept as an
/// independent route. Stops when successive iterates move less than `tol` and
/// the cap-set and hyperplane half-steps are within `tol` of each other.
pub fn project_model_p_dykstra(y: &DenseMatrix, r: f64, tol: f64, iter_cap: usize) -> Result<DenseMatrix> {
    let n = check_square(y, r)?;
    let mut x = y.clone();
    let mut p = DenseMatrix::zeros(n, n);
    let mut q = DenseMatrix::zeros(n, n);
    for _ in 0..iter_cap {
        let prev = x.clone();
        let a_in = x.add(&p)?;
        let a = project_capsets(&a_in);
        p = a_in.sub(&a)?;
        let b_in = a.add(&q)?;
        let mut b = b_in.clone();
        let shift = (r - b.trace()) / n as f64;
        for i in 0..n {
            b[(i, i)] += shift;
        }
        q = b_in.sub(&b)?;
        let gap = a.sub(&b)?.frobenius_norm();
        x = b;
        let moved = x.sub(&prev)?.frobenius_norm();
        // The iterate alone can stall while the corrections still move, so
        // also require the two half-steps to agree.
        if moved <= tol && gap <= tol {
            return Ok(x);
        }
    }
    Err(Error::IterLimit(iter_cap))
}

fn check_square(y: &DenseMatrix, r: f64) -> Result<usize> {
    if !y.is_square() {
        return Err(Error::Dimension(format!("projection needs a square matrix, got {:?}", y.shape())));
    }
    let n = y.rows();
    if !(0.0..=n as f64).contains(&r) {
        return Err(Error::BadParameter(format!("trace target {r} outside [0, {n}]")));
    }
    Ok(n)
}

/// Largest violation of the constraints of `C` (with or without the trace).
pub fn model_p_violation(x: &DenseMatrix, r: Option<f64>) -> f64 {
    let n = x.rows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let t = x[(i, i)];
        worst = worst.max(t - 1.0).max(-t);
        for j in 0..n {
            worst = worst.max(-x[(i, j)]).max(x[(i, j)] - t);
        }
    }
    if let Some(r) = r {
        worst = worst.max((x.trace() - r).abs());
    }
    worst
}
