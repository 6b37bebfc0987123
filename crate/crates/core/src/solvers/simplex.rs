//! Bounded-variable primal simplex on a dense tableau.
//!
//! Two phases with artificial variables, Dantzig pricing that falls back to
//! Bland's rule while pivots are degenerate, and a Harris two-pass ratio test.
//! Pivots touch only the nonzeros of the pivot row and column, which keeps the
//! structured LPs of the separable models cheap at desk scale.

use super::lp::{LinearProgram, LpSolution, LpStatus, Sense};
use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { feas_tol: 1e-9, opt_tol: 1e-8, max_iter: 200_000 }
    }
}

impl SimplexOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { feas_tol: tol.min(1e-9), opt_tol: tol, ..Self::default() }
    }
}

const PIVOT_TOL: f64 = 1e-6;
const DROP_TOL: f64 = 1e-14;
const DEGENERATE_STREAK: usize = 30;
const REFRESH_EVERY: usize = 100;
/// Relative bound violation of a basic value, after refinement, at which the
/// tableau is declared broken.
const DRIFT_TOL: f64 = 1e-6;

pub fn solve_lp_simplex(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    let mut t = Tableau::build(lp, opts);
    let status = t.run();
    Ok(t.finish(lp, status))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Tableau {
    m: usize,
    n_struct: usize,
    ncols: usize,
    /// Row-major `B⁻¹ [A | I | art]`.
    tab: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    /// Original column data (sparse) for residual refresh: (row, value) per column.
    orig_cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    struct_cost: Vec<f64>,
    opts: SimplexOptions,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram, opts: &SimplexOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut orig_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        for &(r, c, v) in &lp.triplets {
            orig_cols[c].push((r, v));
        }
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        for s in &lp.senses {
            let (a, b) = match s {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lo.push(a);
            hi.push(b);
        }
        for i in 0..m {
            orig_cols[n + i].push((i, 1.0));
        }
        let mut x: Vec<f64> = (0..n + m)
            .map(|j| {
                if lo[j].is_finite() {
                    lo[j]
                } else if hi[j].is_finite() {
                    hi[j]
                } else {
                    0.0
                }
            })
            .collect();
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if x[j] != 0.0 {
                for &(r, v) in &orig_cols[j] {
                    activity[r] += v * x[j];
                }
            }
        }

        // Decide which rows need an artificial.
        let mut arts: Vec<(usize, f64, f64)> = Vec::new(); // (row, sign, value)
        let mut basis = vec![usize::MAX; m];
        for i in 0..m {
            let res = lp.rhs[i] - activity[i];
            let s = n + i;
            if res >= lo[s] - opts.feas_tol && res <= hi[s] + opts.feas_tol {
                x[s] = res;
                basis[i] = s;
            } else {
                let sval = res.clamp(lo[s], hi[s]);
                x[s] = sval;
                let gap = res - sval;
                arts.push((i, gap.signum(), gap.abs()));
            }
        }
        let n_art = arts.len();
        let ncols = n + m + n_art;
        for _ in 0..n_art {
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(0.0);
        }
        let mut tab = vec![0.0; m * ncols];
        for j in 0..n + m {
            for &(r, v) in &orig_cols[j] {
                tab[r * ncols + j] = v;
            }
        }
        for (k, &(row, sign, val)) in arts.iter().enumerate() {
            let col = n + m + k;
            tab[row * ncols + col] = sign;
            orig_cols.push(vec![(row, sign)]);
            x[col] = val;
            basis[row] = col;
            if sign < 0.0 {
                tab[row * ncols..(row + 1) * ncols].iter_mut().for_each(|v| *v = -*v);
            }
        }
        let mut row_of = vec![None; ncols];
        for (i, &b) in basis.iter().enumerate() {
            row_of[b] = Some(i);
        }
        let mut cost = vec![0.0; ncols];
        for c in cost.iter_mut().skip(n + m) {
            *c = 1.0;
        }
        let mut t = Self {
            m,
            n_struct: n,
            ncols,
            tab,
            lo,
            hi,
            cost,
            x,
            d: vec![0.0; ncols],
            basis,
            row_of,
            orig_cols,
            rhs: lp.rhs.clone(),
            struct_cost: lp.objective.clone(),
            opts: *opts,
            iterations: 0,
        };
        t.recompute_reduced_costs();
        t
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.tab[i * self.ncols..(i + 1) * self.ncols]
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.ncols..(i + 1) * self.ncols];
                for (dj, &v) in self.d.iter_mut().zip(row) {
                    *dj -= cb * v;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// One round of iterative refinement of the basic values: `x_B += B⁻¹ (b - A x)`.
    fn refine_basic_values(&mut self) {
        let mut r = self.rhs.clone();
        for (j, col) in self.orig_cols.iter().enumerate() {
            let v = self.x[j];
            if v != 0.0 {
                for &(row, a) in col {
                    r[row] -= a * v;
                }
            }
        }
        if r.iter().all(|&v| v == 0.0) {
            return;
        }
        let slack0 = self.n_struct;
        for i in 0..self.m {
            let row = self.row(i);
            let corr: f64 = (0..self.m).map(|k| row[slack0 + k] * r[k]).sum();
            let b = self.basis[i];
            self.x[b] += corr;
        }
    }

    fn drifted(&self) -> bool {
        self.basis.iter().any(|&b| {
            let v = self.x[b];
            let slack = DRIFT_TOL * v.abs().max(1.0);
            !v.is_finite() || v < self.lo[b] - slack || v > self.hi[b] + slack
        })
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, v)| c * v).sum()
    }

    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            if self.row_of[j].is_some() || self.lo[j] == self.hi[j] {
                continue;
            }
            let dj = self.d[j];
            let at_lo = self.x[j] <= self.lo[j];
            let at_hi = self.x[j] >= self.hi[j];
            let dir = if dj < -tol && !at_hi {
                1.0
            } else if dj > tol && !at_lo {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn run(&mut self) -> LpStatus {
        let mut phase = if self.ncols > self.n_struct + self.m { Phase::One } else { Phase::Two };
        if phase == Phase::Two {
            self.enter_phase_two();
        }
        let mut streak = 0usize;
        let mut col = vec![0.0; self.m];
        loop {
            if self.iterations >= self.opts.max_iter {
                return LpStatus::IterLimit;
            }
            if self.iterations > 0 && self.iterations % REFRESH_EVERY == 0 {
                self.refine_basic_values();
                self.recompute_reduced_costs();
                if self.drifted() {
                    return LpStatus::NumericalFailure;
                }
            }
            let bland = streak >= DEGENERATE_STREAK;
            let Some((q, dir)) = self.price(bland) else {
                match phase {
                    Phase::One => {
                        self.refine_basic_values();
                        self.recompute_reduced_costs();
                        if self.price(false).is_some() {
                            continue;
                        }
                        let infeas = self.objective();
                        let scale = self.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));
                        if infeas > 1e-7 * scale {
                            return LpStatus::Infeasible;
                        }
                        phase = Phase::Two;
                        self.enter_phase_two();
                        streak = 0;
                        continue;
                    }
                    Phase::Two => {
                        self.refine_basic_values();
                        self.recompute_reduced_costs();
                        if self.price(false).is_some() {
                            continue;
                        }
                        return LpStatus::Optimal;
                    }
                }
            };
            for (i, c) in col.iter_mut().enumerate() {
                *c = self.tab[i * self.ncols + q];
            }

            // Harris pass 1: relaxed step bound.
            let ftol = self.opts.feas_tol;
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m {
                let a = col[i];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let delta = -dir * a;
                let b = self.basis[i];
                let xb = self.x[b];
                let bound = if delta < 0.0 {
                    if self.lo[b].is_finite() {
                        (xb - self.lo[b] + ftol) / -delta
                    } else {
                        continue;
                    }
                } else if self.hi[b].is_finite() {
                    (self.hi[b] - xb + ftol) / delta
                } else {
                    continue;
                };
                // A basic value that drifted past its bound gives a negative
                // bound; the step is then zero, not skipped.
                relaxed = relaxed.min(bound.max(0.0));
            }
            let flip = self.hi[q] - self.lo[q];
            if relaxed == f64::INFINITY && !flip.is_finite() {
                if phase == Phase::One {
                    // Cannot happen with a bounded-below phase-one objective; treat as stall.
                    return LpStatus::IterLimit;
                }
                return LpStatus::Unbounded;
            }

            // Pass 2: among rows whose exact ratio fits, pick the largest pivot
            // (or the lowest variable index in Bland mode).
            let mut leave: Option<(usize, f64, f64)> = None; // (row, theta, target)
            let mut best_key = f64::NEG_INFINITY;
            for i in 0..self.m {
                let a = col[i];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let delta = -dir * a;
                let b = self.basis[i];
                let xb = self.x[b];
                let (ratio, target) = if delta < 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    (((xb - self.lo[b]) / -delta).max(0.0), self.lo[b])
                } else {
                    if !self.hi[b].is_finite() {
                        continue;
                    }
                    (((self.hi[b] - xb) / delta).max(0.0), self.hi[b])
                };
                if ratio > relaxed {
                    continue;
                }
                let key = if bland { -(b as f64) } else { a.abs() };
                if key > best_key {
                    best_key = key;
                    leave = Some((i, ratio, target));
                }
            }

            self.iterations += 1;
            let theta = match leave {
                Some((_, ratio, _)) if ratio < flip => ratio,
                _ => flip,
            };
            if theta > ftol {
                streak = 0;
            } else {
                streak += 1;
            }
            if theta != 0.0 {
                for i in 0..self.m {
                    if col[i] != 0.0 {
                        let b = self.basis[i];
                        self.x[b] -= dir * theta * col[i];
                    }
                }
            }
            match leave {
                Some((p, ratio, target)) if ratio < flip => {
                    let out = self.basis[p];
                    self.x[q] += dir * theta;
                    self.x[out] = target;
                    if phase == Phase::One && out >= self.n_struct + self.m {
                        self.hi[out] = 0.0;
                    }
                    self.pivot(p, q);
                }
                _ => {
                    // Bound flip of the entering variable.
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
            }
        }
    }

    fn enter_phase_two(&mut self) {
        let art0 = self.n_struct + self.m;
        for j in art0..self.ncols {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if self.row_of[j].is_none() {
                self.x[j] = 0.0;
            }
        }
        for j in art0..self.ncols {
            if self.row_of[j].is_some() {
                self.x[j] = 0.0;
            }
        }
        self.cost.iter_mut().for_each(|c| *c = 0.0);
        self.cost[..self.n_struct].copy_from_slice(&self.struct_cost);
        self.refine_basic_values();
        self.recompute_reduced_costs();
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.tab[p * nc + q];
        let inv = 1.0 / piv;
        let mut nz: Vec<(usize, f64)> = Vec::new();
        {
            let prow = &mut self.tab[p * nc..(p + 1) * nc];
            for (j, v) in prow.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        nz.push((j, *v));
                    }
                }
            }
            prow[q] = 1.0;
        }
        for i in 0..self.m {
            if i == p {
                continue;
            }
            let f = self.tab[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tab[i * nc..(i + 1) * nc];
            for &(j, v) in &nz {
                let nv = row[j] - f * v;
                row[j] = if nv.abs() < DROP_TOL { 0.0 } else { nv };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &(j, v) in &nz {
                self.d[j] -= f * v;
            }
        }
        self.d[q] = 0.0;
        let out = self.basis[p];
        self.row_of[out] = None;
        self.row_of[q] = Some(p);
        self.basis[p] = q;
    }

    fn finish(mut self, lp: &LinearProgram, mut status: LpStatus) -> LpSolution {
        self.refine_basic_values();
        self.refine_basic_values();
        if status == LpStatus::Optimal && self.drifted() {
            status = LpStatus::NumericalFailure;
        }
        let mut x = self.x[..self.n_struct].to_vec();
        // Snap values that drifted past their bounds by rounding.
        for (j, v) in x.iter_mut().enumerate() {
            *v = v.clamp(lp.lower[j], lp.upper[j]);
        }
        self.recompute_reduced_costs();
        let mut dual_residual: f64 = 0.0;
        if status == LpStatus::Optimal {
            for j in 0..self.ncols {
                if self.row_of[j].is_some() || self.lo[j] == self.hi[j] {
                    continue;
                }
                let dj = self.d[j];
                let viol = if self.x[j] <= self.lo[j] {
                    (-dj).max(0.0)
                } else if self.x[j] >= self.hi[j] {
                    dj.max(0.0)
                } else {
                    dj.abs()
                };
                dual_residual = dual_residual.max(viol);
            }
        }
        LpSolution {
            status,
            objective: lp.evaluate(&x),
            primal_residual: lp.max_violation(&x),
            dual_residual,
            x,
            iterations: self.iterations,
        }
    }
}
