//! Restarted primal-dual hybrid gradient (Chambolle-Pock) for the
//! self-expressive models.
//!
//! All three models share the saddle form
//!
//! ```text
//! min_{X in S} max_Y  <F, X> + <Y, AX> - <Y, A> - h*(-Y)
//! ```
//!
//! where `S` is the cap-set feasible region (with or without the trace), `F`
//! is a diagonal cost and `h` acts on the residual `A - AX`: either its
//! induced L1 norm (whose conjugate is the indicator of
//! `{ Y : Σ_j ‖y_j‖_∞ <= 1 }`) or the indicator of per-column L1 balls of a
//! fixed radius (conjugate `radius · Σ_j ‖y_j‖_∞`).
//!
//! For any `Y` the dual function is available in closed form, because a linear
//! function over `S` is minimized row by row: row `i` contributes
//! `X(i,i) · c_i` with `c_i = G(i,i) + Σ_{j≠i} min(G(i,j), 0)` and
//! `G = F + AᵀY`. With the trace pinned to `r` the optimum takes the `r`
//! smallest `c_i`; without it, every negative `c_i`. The solver therefore
//! stops on a certified duality gap.

use super::projection::{project_capsets, project_model_p_feasible};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResidualTerm {
    /// Minimize `‖A - AX‖₁` (model P).
    Norm,
    /// Keep every residual column in an L1 ball of this radius (models Q, R).
    Ball(f64),
}

#[derive(Debug, Clone)]
pub struct FirstOrderProblem<'a> {
    pub a: &'a DenseMatrix,
    /// Cost on `diag(X)`; empty means zero.
    pub diag_cost: Vec<f64>,
    pub residual: ResidualTerm,
    /// Trace target; `None` drops the trace constraint.
    pub trace: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FirstOrderOptions {
    /// Absolute duality-gap target.
    pub gap_tol: f64,
    /// Allowed excess of a residual column over its ball radius.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for FirstOrderOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-5, feas_tol: 1e-6, max_iter: 50_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstOrderStatus {
    Converged,
    /// The iteration cap was hit; the solution holds the best iterate seen.
    IterLimit,
}

#[derive(Debug, Clone)]
pub struct FirstOrderSolution {
    pub x: DenseMatrix,
    pub status: FirstOrderStatus,
    /// Primal objective at `x`.
    pub objective: f64,
    /// Best certified lower bound on the optimal value.
    pub dual_bound: f64,
    /// `max_j (‖a_j - A x_j‖₁ - radius)_+`; zero for [`ResidualTerm::Norm`].
    pub residual_violation: f64,
    pub iterations: usize,
    pub restarts: usize,
}

impl FirstOrderSolution {
    pub fn gap(&self) -> f64 {
        self.objective - self.dual_bound
    }
}

const CHECK_EVERY: usize = 40;

pub fn solve_first_order(problem: &FirstOrderProblem, opts: &FirstOrderOptions) -> Result<FirstOrderSolution> {
    let a = problem.a;
    let (d, n) = a.shape();
    if !problem.diag_cost.is_empty() && problem.diag_cost.len() != n {
        return Err(Error::Dimension(format!("diagonal cost of length {} for {n} columns", problem.diag_cost.len())));
    }
    if let Some(r) = problem.trace {
        if r == 0 || r > n {
            return Err(Error::BadParameter(format!("trace {r} outside [1, {n}]")));
        }
    }
    if let ResidualTerm::Ball(radius) = problem.residual {
        if !(radius >= 0.0) {
            return Err(Error::BadParameter(format!("ball radius {radius}")));
        }
    }
    let cost: Vec<f64> = if problem.diag_cost.is_empty() { vec![0.0; n] } else { problem.diag_cost.clone() };
    let eval = Evaluator { a, cost: &cost, residual: problem.residual, trace: problem.trace };
    let primal_cap = eval.primal_cap();

    let step = 0.99 / spectral_norm(a).max(1e-12);
    let mut weight = initial_weight(a, &cost);

    let project = |y: &DenseMatrix| -> Result<DenseMatrix> {
        match problem.trace {
            Some(r) => project_model_p_feasible(y, r as f64, 1e-9, 300),
            None => Ok(project_capsets(y)),
        }
    };

    let mut x = project(&DenseMatrix::identity(n).scale(problem.trace.map_or(1.0, |r| r as f64 / n as f64)))?;
    let mut y = DenseMatrix::zeros(d, n);
    let mut ax = a.matmul(&x)?;
    let mut aty = a.tr_matmul(&y)?;

    let mut best = Candidate::new(&x, &eval, &ax, f64::NEG_INFINITY);
    let mut best_dual = eval.dual(&y, &aty);

    // Running averages since the last restart, and the restart anchor.
    let mut x_sum = DenseMatrix::zeros(n, n);
    let mut y_sum = DenseMatrix::zeros(d, n);
    let mut avg_count = 0usize;
    let mut anchor_x = x.clone();
    let mut anchor_y = y.clone();
    let mut anchor_merit = f64::INFINITY;
    let mut last_merit = f64::INFINITY;
    let mut since_restart = 0usize;
    let mut restarts = 0usize;

    let mut iterations = 0usize;
    while iterations < opts.max_iter {
        iterations += 1;
        since_restart += 1;
        let tau = step / weight;
        let sigma = step * weight;

        // Primal step.
        let mut z = x.clone();
        {
            let zs = z.as_mut_slice();
            for (zi, gi) in zs.iter_mut().zip(aty.as_slice()) {
                *zi -= tau * gi;
            }
            for i in 0..n {
                zs[i * n + i] -= tau * cost[i];
            }
        }
        let x_new = project(&z)?;
        let ax_new = a.matmul(&x_new)?;

        // Dual step at the extrapolated point.
        let mut v = y.clone();
        {
            let vs = v.as_mut_slice();
            for ((vi, &p), (&q, &ai)) in vs.iter_mut().zip(ax_new.as_slice()).zip(ax.as_slice().iter().zip(a.as_slice())) {
                *vi += sigma * (2.0 * p - q - ai);
            }
        }
        let y_new = match problem.residual {
            ResidualTerm::Norm => project_dual_ball(&v),
            ResidualTerm::Ball(radius) => shrink_columns_linf(&v, sigma * radius),
        };
        let aty_new = a.tr_matmul(&y_new)?;

        x = x_new;
        y = y_new;
        ax = ax_new;
        aty = aty_new;
        x_sum = x_sum.add(&x)?;
        y_sum = y_sum.add(&y)?;
        avg_count += 1;

        if iterations % CHECK_EVERY != 0 && iterations != opts.max_iter {
            continue;
        }

        let dual_now = eval.dual(&y, &aty);
        best_dual = best_dual.max(dual_now);
        let cur = Candidate::new(&x, &eval, &ax, dual_now);
        let x_avg = x_sum.scale(1.0 / avg_count as f64);
        let y_avg = y_sum.scale(1.0 / avg_count as f64);
        let ax_avg = a.matmul(&x_avg)?;
        let aty_avg = a.tr_matmul(&y_avg)?;
        let dual_avg = eval.dual(&y_avg, &aty_avg);
        best_dual = best_dual.max(dual_avg);
        let avg = Candidate::new(&x_avg, &eval, &ax_avg, dual_avg);

        for cand in [&cur, &avg] {
            if cand.better_than(&best, opts.feas_tol) {
                best = cand.clone();
            }
        }
        if best_dual > primal_cap + opts.gap_tol {
            return Err(Error::Infeasible);
        }
        if best.violation <= opts.feas_tol && best.objective - best_dual <= opts.gap_tol {
            return Ok(best.finish(FirstOrderStatus::Converged, best_dual, iterations, restarts));
        }

        // Adaptive restart on the local merit (gap plus infeasibility).
        let (restart_from, merit) = if avg.merit() < cur.merit() { (Some((x_avg, y_avg, ax_avg, aty_avg)), avg.merit()) } else { (None, cur.merit()) };
        let restart = merit <= 0.2 * anchor_merit
            || (merit <= 0.8 * anchor_merit && merit > last_merit)
            || since_restart >= iterations * 36 / 100;
        last_merit = merit;
        if restart {
            if let Some((xa, ya, axa, atya)) = restart_from {
                x = xa;
                y = ya;
                ax = axa;
                aty = atya;
            }
            let dx = x.sub(&anchor_x)?.frobenius_norm();
            let dy = y.sub(&anchor_y)?.frobenius_norm();
            if dx > 1e-10 && dy > 1e-10 {
                weight = (0.5 * (dy / dx).ln() + 0.5 * weight.ln()).exp().clamp(1e-4, 1e4);
            }
            anchor_x = x.clone();
            anchor_y = y.clone();
            anchor_merit = merit;
            last_merit = f64::INFINITY;
            x_sum = DenseMatrix::zeros(n, n);
            y_sum = DenseMatrix::zeros(d, n);
            avg_count = 0;
            since_restart = 0;
            restarts += 1;
        }
    }
    Ok(best.finish(FirstOrderStatus::IterLimit, best_dual, iterations, restarts))
}

struct Evaluator<'a> {
    a: &'a DenseMatrix,
    cost: &'a [f64],
    residual: ResidualTerm,
    trace: Option<usize>,
}

impl Evaluator<'_> {
    /// Primal objective and residual-ball violation at `x`, given `ax = A x`.
    fn primal(&self, x: &DenseMatrix, ax: &DenseMatrix) -> (f64, f64) {
        let (d, n) = self.a.shape();
        let col_res: Vec<f64> = (0..n)
            .map(|j| {
                let (aj, axj) = (&self.a.as_slice()[j * d..(j + 1) * d], &ax.as_slice()[j * d..(j + 1) * d]);
                aj.iter().zip(axj).map(|(p, q)| (p - q).abs()).sum()
            })
            .collect();
        let linear: f64 = (0..n).map(|i| self.cost[i] * x[(i, i)]).sum();
        match self.residual {
            ResidualTerm::Norm => (linear + col_res.iter().copied().fold(0.0, f64::max), 0.0),
            ResidualTerm::Ball(radius) => {
                (linear, col_res.iter().map(|&c| (c - radius).max(0.0)).fold(0.0, f64::max))
            }
        }
    }

    /// Dual function at `y`, given `aty = Aᵀ y`. Requires `y` in the dual
    /// domain, which every iterate satisfies.
    fn dual(&self, y: &DenseMatrix, aty: &DenseMatrix) -> f64 {
        let n = self.a.cols();
        let mut c: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = self.cost[i] + aty[(i, i)];
                for j in 0..n {
                    if j != i {
                        s += aty[(i, j)].min(0.0);
                    }
                }
                s
            })
            .collect();
        let linear = match self.trace {
            Some(r) => {
                c.sort_by(f64::total_cmp);
                c[..r].iter().sum::<f64>()
            }
            None => c.iter().map(|&v| v.min(0.0)).sum(),
        };
        let ya: f64 = y.as_slice().iter().zip(self.a.as_slice()).map(|(p, q)| p * q).sum();
        let conj = match self.residual {
            ResidualTerm::Norm => 0.0,
            ResidualTerm::Ball(radius) => {
                let d = y.rows();
                radius * y.as_slice().chunks(d).map(|col| col.iter().fold(0.0f64, |m, v| m.max(v.abs()))).sum::<f64>()
            }
        };
        linear - ya - conj
    }

    /// An upper bound on the primal objective over the whole feasible set.
    /// A dual value above it certifies infeasibility.
    fn primal_cap(&self) -> f64 {
        match self.residual {
            ResidualTerm::Norm => f64::INFINITY,
            ResidualTerm::Ball(_) => match self.trace {
                Some(r) => {
                    let mut c = self.cost.to_vec();
                    c.sort_by(|a, b| b.total_cmp(a));
                    c[..r].iter().sum()
                }
                None => self.cost.iter().map(|v| v.max(0.0)).sum(),
            },
        }
    }
}

#[derive(Clone)]
struct Candidate {
    x: DenseMatrix,
    objective: f64,
    violation: f64,
    dual: f64,
}

impl Candidate {
    fn new(x: &DenseMatrix, eval: &Evaluator, ax: &DenseMatrix, dual: f64) -> Self {
        let (objective, violation) = eval.primal(x, ax);
        Self { x: x.clone(), objective, violation, dual }
    }

    fn merit(&self) -> f64 {
        (self.objective - self.dual).abs().max(self.violation)
    }

    /// Feasible candidates beat infeasible ones; among feasible ones the lower
    /// objective wins, otherwise the smaller violation.
    fn better_than(&self, other: &Candidate, feas_tol: f64) -> bool {
        match (self.violation <= feas_tol, other.violation <= feas_tol) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.objective < other.objective,
            (false, false) => self.violation < other.violation,
        }
    }

    fn finish(self, status: FirstOrderStatus, dual_bound: f64, iterations: usize, restarts: usize) -> FirstOrderSolution {
        FirstOrderSolution {
            x: self.x,
            status,
            objective: self.objective,
            dual_bound,
            residual_violation: self.violation,
            iterations,
            restarts,
        }
    }
}

/// Largest singular value by power iteration on `AᵀA`, padded slightly.
fn spectral_norm(a: &DenseMatrix) -> f64 {
    let n = a.cols();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut est = 0.0;
    for _ in 0..200 {
        let av = a.mul_vec(&v).expect("square-compatible");
        let mut w: Vec<f64> = (0..n).map(|j| crate::linalg::dot(a.col(j), &av)).collect();
        let norm = crate::linalg::norm2(&w);
        if norm == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let converged = (norm - est).abs() <= 1e-10 * norm;
        est = norm;
        v = w;
        if converged {
            break;
        }
    }
    est.sqrt() * 1.01
}

fn initial_weight(a: &DenseMatrix, cost: &[f64]) -> f64 {
    let c = crate::linalg::norm2(cost);
    let b = a.frobenius_norm();
    if c > 0.0 && b > 0.0 {
        (c / b).clamp(1e-2, 1e2)
    } else {
        1.0
    }
}

/// Euclidean projection onto `{ Y : Σ_j ‖y_j‖_∞ <= 1 }`.
///
/// Column `j` is clipped at a level `t_j`; a common multiplier `λ` fixes each
/// level through `Σ_k (|y_kj| - t_j)_+ = λ`, and `λ` is found by bisection so
/// that the levels sum to one.
pub fn project_dual_ball(v: &DenseMatrix) -> DenseMatrix {
    let d = v.rows();
    let col_max: Vec<f64> = v.as_slice().chunks(d).map(|c| c.iter().fold(0.0f64, |m, x| m.max(x.abs()))).collect();
    if col_max.iter().sum::<f64>() <= 1.0 {
        return v.clone();
    }
    let sorted: Vec<(Vec<f64>, Vec<f64>)> = v
        .as_slice()
        .chunks(d)
        .map(|c| {
            let mut s: Vec<f64> = c.iter().map(|x| x.abs()).collect();
            s.sort_unstable_by(|a, b| b.total_cmp(a));
            let mut pre = Vec::with_capacity(d + 1);
            pre.push(0.0);
            let mut acc = 0.0;
            for &x in &s {
                acc += x;
                pre.push(acc);
            }
            (s, pre)
        })
        .collect();
    let levels = |lambda: f64| -> Vec<f64> { sorted.iter().map(|(s, pre)| clip_level(s, pre, lambda)).collect() };
    // Σ_j t_j(λ) is piecewise linear and nonincreasing; safeguarded Newton.
    let total = |lambda: f64| -> (f64, f64) {
        sorted.iter().fold((0.0, 0.0), |(t, sl), (s, pre)| {
            let (tj, dj) = clip_level_slope(s, pre, lambda);
            (t + tj, sl + dj)
        })
    };
    let mut lo = 0.0;
    let mut hi = sorted.iter().map(|(_, pre)| pre[d]).fold(0.0, f64::max);
    let mut lambda = 0.0;
    for _ in 0..200 {
        let (sum, slope) = total(lambda);
        if (sum - 1.0).abs() <= 1e-14 {
            hi = lambda;
            break;
        }
        if sum > 1.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
        let newton = if slope < 0.0 { lambda + (sum - 1.0) / -slope } else { f64::NAN };
        lambda = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    let t = levels(hi);
    let mut out = v.clone();
    for (col, &tj) in out.as_mut_slice().chunks_mut(d).zip(&t) {
        for x in col {
            *x = x.clamp(-tj, tj);
        }
    }
    out
}

/// Level `t >= 0` with `Σ_k (s_k - t)_+ = λ` for `s` sorted descending (zero
/// when the whole column sums to at most `λ`).
fn clip_level(s: &[f64], pre: &[f64], lambda: f64) -> f64 {
    clip_level_slope(s, pre, lambda).0
}

/// [`clip_level`] and its derivative in `λ` (`-1/k` on piece `k`).
fn clip_level_slope(s: &[f64], pre: &[f64], lambda: f64) -> (f64, f64) {
    let d = s.len();
    if pre[d] <= lambda {
        return (0.0, 0.0);
    }
    // On the piece where the k largest exceed t: t = (pre[k] - λ) / k.
    for k in 1..=d {
        let t = (pre[k] - lambda) / k as f64;
        let next = if k < d { s[k] } else { 0.0 };
        if t >= next {
            return (t.max(0.0), -1.0 / k as f64);
        }
    }
    (0.0, 0.0)
}

/// `w - Proj_{L1 ball(radius)}(w)` per column, the prox of `radius · ‖·‖_∞`.
pub fn shrink_columns_linf(w: &DenseMatrix, radius: f64) -> DenseMatrix {
    let d = w.rows();
    let mut out = w.clone();
    for col in out.as_mut_slice().chunks_mut(d) {
        let proj = project_l1_ball(col, radius);
        for (x, p) in col.iter_mut().zip(proj) {
            *x -= p;
        }
    }
    out
}

/// Euclidean projection onto `{ z : ‖z‖₁ <= radius }` by sorting.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    if radius <= 0.0 {
        return vec![0.0; v.len()];
    }
    let mut s: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &x) in s.iter().enumerate() {
        acc += x;
        let t = (acc - radius) / (k + 1) as f64;
        if x > t {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|&x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}
