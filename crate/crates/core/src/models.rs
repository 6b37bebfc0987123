//! The three self-expressive models and their solution certificates.
//!
//! * **P**: `min ‖A - AX‖₁` over `C = { tr X = r, 0 <= X(i,j) <= X(i,i) <= 1 }`.
//! * **Q**: `min fᵀ diag X` over `C` with `‖A - AX‖₁ <= 2ε`.
//! * **R**: `min gᵀ diag X` over the cap sets (no trace) with `‖A - AX‖₁ <= ρε`.
//!
//! Every model is available both as an explicit LP for the simplex backend and
//! through the first-order backend.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{format_matrix, induced_l1_norm, l1_norm, parse_matrix, DenseMatrix};
use crate::solvers::{
    model_p_violation, solve_first_order, solve_lp_simplex, FirstOrderOptions, FirstOrderProblem, FirstOrderStatus,
    LinearProgram, LpStatus, ResidualTerm, Sense, SimplexOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    P,
    Q,
    R,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::P => "P",
            Model::Q => "Q",
            Model::R => "R",
        })
    }
}

impl std::str::FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "P" => Ok(Model::P),
            "Q" => Ok(Model::Q),
            "R" => Ok(Model::R),
            _ => Err(Error::BadParameter(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Simplex,
    FirstOrder,
    /// Simplex up to [`ModelOptions::auto_simplex_max_n`] columns, first-order above.
    Auto,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Simplex => "simplex",
            Backend::FirstOrder => "first-order",
            Backend::Auto => "auto",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplex" => Ok(Backend::Simplex),
            "first-order" | "firstorder" => Ok(Backend::FirstOrder),
            "auto" => Ok(Backend::Auto),
            _ => Err(Error::BadParameter(format!("unknown backend `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelOptions {
    pub backend: Backend,
    pub auto_simplex_max_n: usize,
    pub simplex: SimplexOptions,
    pub first_order: FirstOrderOptions,
    /// Model Q diagonal cost; `None` means `f_i = i / n`.
    pub f: Option<Vec<f64>>,
    /// Model R diagonal cost; `None` means `g_i = 1 + i / n`.
    pub g: Option<Vec<f64>>,
    pub rho: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            auto_simplex_max_n: 30,
            simplex: SimplexOptions::default(),
            first_order: FirstOrderOptions::default(),
            f: None,
            g: None,
            rho: 1.0,
        }
    }
}

impl ModelOptions {
    pub fn with_backend(backend: Backend) -> Self {
        Self { backend, ..Self::default() }
    }

    pub fn resolve_backend(&self, n: usize) -> Backend {
        match self.backend {
            Backend::Auto if n <= self.auto_simplex_max_n => Backend::Simplex,
            Backend::Auto => Backend::FirstOrder,
            b => b,
        }
    }

    /// Model Q cost vector for `n` columns (1-based `i`).
    pub fn f_vector(&self, n: usize) -> Result<Vec<f64>> {
        let f = self.f.clone().unwrap_or_else(|| (1..=n).map(|i| i as f64 / n as f64).collect());
        check_cost(&f, n, "f", false)?;
        Ok(f)
    }

    /// Model R cost vector for `n` columns (1-based `i`).
    pub fn g_vector(&self, n: usize) -> Result<Vec<f64>> {
        let g = self.g.clone().unwrap_or_else(|| (1..=n).map(|i| 1.0 + i as f64 / n as f64).collect());
        check_cost(&g, n, "g", true)?;
        Ok(g)
    }
}

fn check_cost(v: &[f64], n: usize, name: &str, positive: bool) -> Result<()> {
    if v.len() != n {
        return Err(Error::Dimension(format!("{name} has length {}, expected {n}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite() || (positive && *x <= 0.0)) {
        return Err(Error::BadParameter(format!("{name} must be finite{}", if positive { " and positive" } else { "" })));
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadParameter(format!("{name} entries must be pairwise distinct")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// First-order iteration cap reached; the certificate holds the best iterate.
    IterLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::IterLimit => "iter-limit",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub backend: Backend,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Largest violation of the model constraints at `X_opt`.
    pub primal_residual: f64,
    /// Simplex: reduced-cost sign violation. First-order: duality gap.
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub model: Model,
    pub x_opt: DenseMatrix,
    /// `‖A - A X_opt‖₁`.
    pub theta: f64,
    /// Value of the model's own objective (`theta` for P).
    pub objective: f64,
    /// `diag(X_opt)`.
    pub p: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl Certificate {
    fn new(model: Model, a: &DenseMatrix, x_opt: DenseMatrix, objective: Option<f64>, diagnostics: Diagnostics) -> Result<Self> {
        let theta = induced_l1_norm(&a.sub(&a.matmul(&x_opt)?)?);
        let p = x_opt.diagonal();
        Ok(Self { model, x_opt, theta, objective: objective.unwrap_or(theta), p, diagnostics })
    }

    /// Solver-aware slack used by the bound checks.
    pub fn tolerance(&self) -> f64 {
        1e-6 + 10.0 * self.diagnostics.primal_residual.max(self.diagnostics.dual_residual.max(0.0))
    }

    pub fn to_text(&self) -> String {
        let body = format_matrix(&self.x_opt);
        let (magic, rest) = body.split_once('\n').expect("container has a magic line");
        let d = &self.diagnostics;
        format!(
            "{magic}\n# model {}\n# theta {:?}\n# objective {:?}\n# backend {}\n# status {}\n# iterations {}\n# primal_residual {:?}\n# dual_residual {:?}\n{rest}",
            self.model, self.theta, self.objective, d.backend, d.status, d.iterations, d.primal_residual, d.dual_residual
        )
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let bad = |msg: String| Error::Malformed { path: origin.to_path_buf(), msg };
        let meta: std::collections::HashMap<&str, &str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("# "))
            .filter_map(|l| l.split_once(' '))
            .collect();
        let get = |k: &str| meta.get(k).copied().ok_or_else(|| bad(format!("missing `{k}`")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|e| bad(format!("{k}: {e}"))) };
        let x_opt = parse_matrix(text, origin)?;
        let status = match get("status")? {
            "optimal" => SolveStatus::Optimal,
            "iter-limit" => SolveStatus::IterLimit,
            s => return Err(bad(format!("unknown status `{s}`"))),
        };
        Ok(Self {
            model: get("model")?.parse()?,
            theta: num("theta")?,
            objective: num("objective")?,
            p: x_opt.diagonal(),
            diagnostics: Diagnostics {
                backend: get("backend")?.parse()?,
                status,
                iterations: get("iterations")?.parse().map_err(|e| bad(format!("iterations: {e}")))?,
                primal_residual: num("primal_residual")?,
                dual_residual: num("dual_residual")?,
            },
            x_opt,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?, path)
    }
}

/// Variable layout shared by the LP builders: `X` column-major, then `Y`
/// (d×n) column-major, then the epigraph variable `z` when present.
#[derive(Debug, Clone, Copy)]
pub struct LpLayout {
    pub d: usize,
    pub n: usize,
}

impl LpLayout {
    pub fn x(&self, i: usize, j: usize) -> usize {
        i + j * self.n
    }
    pub fn y(&self, k: usize, j: usize) -> usize {
        self.n * self.n + k + j * self.d
    }
    pub fn z(&self) -> usize {
        self.n * self.n + self.d * self.n
    }
    pub fn extract_x(&self, sol: &[f64]) -> DenseMatrix {
        DenseMatrix::new(self.n, self.n, sol[..self.n * self.n].to_vec())
            .unwrap_or_else(|_| DenseMatrix::zeros(self.n, self.n))
    }
}

fn check_input(a: &DenseMatrix, r: Option<usize>) -> Result<(usize, usize)> {
    let (d, n) = a.shape();
    if d == 0 || n == 0 {
        return Err(Error::Dimension("empty data matrix".into()));
    }
    for j in 0..n {
        for (i, v) in a.col(j).iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    if let Some(r) = r {
        if r == 0 || r > n {
            return Err(Error::Dimension(format!("r = {r} outside [1, {n}]")));
        }
    }
    Ok((d, n))
}

/// Shared constraint block: caps, bounds and the two-sided residual rows
/// `-Y <= A - AX <= Y`.
fn base_lp(a: &DenseMatrix, with_z: bool) -> (LinearProgram, LpLayout) {
    let (d, n) = a.shape();
    let lay = LpLayout { d, n };
    let mut lp = LinearProgram::new(n * n + d * n + usize::from(with_z));
    for j in 0..n {
        for i in 0..n {
            let hi = if i == j { 1.0 } else { f64::INFINITY };
            lp.set_bounds(lay.x(i, j), 0.0, hi);
        }
        for k in 0..d {
            lp.set_bounds(lay.y(k, j), f64::NEG_INFINITY, f64::INFINITY);
        }
    }
    if with_z {
        lp.set_bounds(lay.z(), f64::NEG_INFINITY, f64::INFINITY);
    }
    for j in 0..n {
        for i in 0..n {
            if i != j {
                lp.add_row(&[(lay.x(i, j), 1.0), (lay.x(i, i), -1.0)], Sense::Le, 0.0);
            }
        }
    }
    let mut row = Vec::with_capacity(n + 1);
    for j in 0..n {
        for k in 0..d {
            // (AX)_{kj} - A_{kj} <= Y_{kj}   and   A_{kj} - (AX)_{kj} <= Y_{kj}
            row.clear();
            row.extend((0..n).map(|l| (lay.x(l, j), a[(k, l)])));
            row.push((lay.y(k, j), -1.0));
            lp.add_row(&row, Sense::Le, a[(k, j)]);
            for e in row.iter_mut().take(n) {
                e.1 = -e.1;
            }
            lp.add_row(&row, Sense::Le, -a[(k, j)]);
        }
    }
    (lp, lay)
}

fn add_trace(lp: &mut LinearProgram, lay: &LpLayout, r: usize) {
    let row: Vec<(usize, f64)> = (0..lay.n).map(|i| (lay.x(i, i), 1.0)).collect();
    lp.add_row(&row, Sense::Eq, r as f64);
}

/// The LP form of model P: `n² + dn + 1` variables and
/// `2n² + 2dn + n + 1` constraints when bounds are counted as constraints.
pub fn build_lp_p_prime(a: &DenseMatrix, r: usize) -> Result<(LinearProgram, LpLayout)> {
    let (d, n) = check_input(a, Some(r))?;
    let (mut lp, lay) = base_lp(a, true);
    for j in 0..n {
        let mut row: Vec<(usize, f64)> = (0..d).map(|k| (lay.y(k, j), 1.0)).collect();
        row.push((lay.z(), -1.0));
        lp.add_row(&row, Sense::Le, 0.0);
    }
    add_trace(&mut lp, &lay, r);
    lp.objective[lay.z()] = 1.0;
    Ok((lp, lay))
}

fn add_radius_rows(lp: &mut LinearProgram, lay: &LpLayout, radius: f64) {
    for j in 0..lay.n {
        let row: Vec<(usize, f64)> = (0..lay.d).map(|k| (lay.y(k, j), 1.0)).collect();
        lp.add_row(&row, Sense::Le, radius);
    }
}

pub fn build_lp_q(a: &DenseMatrix, r: usize, eps: f64, f: &[f64]) -> Result<(LinearProgram, LpLayout)> {
    let (_, n) = check_input(a, Some(r))?;
    check_eps(eps)?;
    let (mut lp, lay) = base_lp(a, false);
    add_radius_rows(&mut lp, &lay, 2.0 * eps);
    add_trace(&mut lp, &lay, r);
    for i in 0..n {
        lp.objective[lay.x(i, i)] = f[i];
    }
    Ok((lp, lay))
}

pub fn build_lp_r(a: &DenseMatrix, eps: f64, rho: f64, g: &[f64]) -> Result<(LinearProgram, LpLayout)> {
    let (_, n) = check_input(a, None)?;
    check_eps(eps)?;
    let (mut lp, lay) = base_lp(a, false);
    add_radius_rows(&mut lp, &lay, rho * eps);
    for i in 0..n {
        lp.objective[lay.x(i, i)] = g[i];
    }
    Ok((lp, lay))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::BadParameter(format!("eps must be finite and nonnegative, got {eps}")));
    }
    Ok(())
}

fn solve_with_simplex(
    model: Model,
    a: &DenseMatrix,
    (lp, lay): (LinearProgram, LpLayout),
    opts: &ModelOptions,
    trace: Option<usize>,
) -> Result<Certificate> {
    let sol = solve_lp_simplex(&lp, &opts.simplex)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::IterLimit => return Err(Error::IterLimit(sol.iterations)),
        LpStatus::NumericalFailure => return Err(Error::NoConvergence { what: "simplex", iterations: sol.iterations }),
    }
    let x = lay.extract_x(&sol.x);
    let primal_residual = sol.primal_residual.max(model_p_violation(&x, trace.map(|r| r as f64)));
    let diagnostics = Diagnostics {
        backend: Backend::Simplex,
        status: SolveStatus::Optimal,
        iterations: sol.iterations,
        primal_residual,
        dual_residual: sol.dual_residual,
    };
    let objective = (model != Model::P).then_some(sol.objective);
    Certificate::new(model, a, x, objective, diagnostics)
}

/// Simplex first; a numerical breakdown falls back to the first-order
/// backend, which the certificate's diagnostics then report.
fn solve_simplex_or_fallback(
    model: Model,
    a: &DenseMatrix,
    lp: (LinearProgram, LpLayout),
    problem: FirstOrderProblem,
    opts: &ModelOptions,
) -> Result<Certificate> {
    match solve_with_simplex(model, a, lp, opts, problem.trace) {
        Err(Error::NoConvergence { what: "simplex", .. }) => solve_with_first_order(model, a, problem, opts),
        other => other,
    }
}

fn solve_with_first_order(model: Model, a: &DenseMatrix, problem: FirstOrderProblem, opts: &ModelOptions) -> Result<Certificate> {
    let trace = problem.trace;
    let sol = solve_first_order(&problem, &opts.first_order)?;
    let status = match sol.status {
        FirstOrderStatus::Converged => SolveStatus::Optimal,
        FirstOrderStatus::IterLimit => SolveStatus::IterLimit,
    };
    let diagnostics = Diagnostics {
        backend: Backend::FirstOrder,
        status,
        iterations: sol.iterations,
        primal_residual: sol.residual_violation.max(model_p_violation(&sol.x, trace.map(|r| r as f64))),
        dual_residual: sol.gap().max(0.0),
    };
    let objective = (model != Model::P).then_some(sol.objective);
    Certificate::new(model, a, sol.x, objective, diagnostics)
}

pub fn solve_model_p(a: &DenseMatrix, r: usize, opts: &ModelOptions) -> Result<Certificate> {
    let (_, n) = check_input(a, Some(r))?;
    let problem = FirstOrderProblem { a, diag_cost: Vec::new(), residual: ResidualTerm::Norm, trace: Some(r) };
    match opts.resolve_backend(n) {
        Backend::Simplex => solve_simplex_or_fallback(Model::P, a, build_lp_p_prime(a, r)?, problem, opts),
        _ => solve_with_first_order(Model::P, a, problem, opts),
    }
}

pub fn solve_model_q(a: &DenseMatrix, r: usize, eps: f64, opts: &ModelOptions) -> Result<Certificate> {
    let (_, n) = check_input(a, Some(r))?;
    check_eps(eps)?;
    let f = opts.f_vector(n)?;
    let lp = match opts.resolve_backend(n) {
        Backend::Simplex => Some(build_lp_q(a, r, eps, &f)?),
        _ => None,
    };
    let problem = FirstOrderProblem { a, diag_cost: f, residual: ResidualTerm::Ball(2.0 * eps), trace: Some(r) };
    match lp {
        Some(lp) => solve_simplex_or_fallback(Model::Q, a, lp, problem, opts),
        None => solve_with_first_order(Model::Q, a, problem, opts),
    }
}

pub fn solve_model_r(a: &DenseMatrix, eps: f64, opts: &ModelOptions) -> Result<Certificate> {
    let (_, n) = check_input(a, None)?;
    check_eps(eps)?;
    if !(opts.rho > 0.0) {
        return Err(Error::BadParameter(format!("rho must be positive, got {}", opts.rho)));
    }
    let g = opts.g_vector(n)?;
    let lp = match opts.resolve_backend(n) {
        Backend::Simplex => Some(build_lp_r(a, eps, opts.rho, &g)?),
        _ => None,
    };
    let problem = FirstOrderProblem { a, diag_cost: g, residual: ResidualTerm::Ball(opts.rho * eps), trace: None };
    match lp {
        Some(lp) => solve_simplex_or_fallback(Model::R, a, lp, problem, opts),
        None => solve_with_first_order(Model::R, a, problem, opts),
    }
}

/// The separability witness `X₀ = Πᵀ [I, H̄; 0, 0] Π`.
///
/// `permutation[c]` is the column of `[I, H̄]` that sits at position `c`.
pub fn construct_x0(hbar: &DenseMatrix, permutation: &[usize]) -> Result<DenseMatrix> {
    let r = hbar.rows();
    let n = r + hbar.cols();
    if permutation.len() != n {
        return Err(Error::Dimension(format!("permutation of length {} for {n} columns", permutation.len())));
    }
    let block = |p: usize, q: usize| -> f64 {
        if p >= r {
            0.0
        } else if q < r {
            f64::from(u8::from(p == q))
        } else {
            hbar[(p, q - r)]
        }
    };
    let mut x = DenseMatrix::zeros(n, n);
    for c2 in 0..n {
        for c1 in 0..n {
            x[(c1, c2)] = block(permutation[c1], permutation[c2]);
        }
    }
    Ok(x)
}

/// One line of a bound check.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value.
    pub measured: f64,
    /// Bound it is compared against (tolerance included).
    pub bound: f64,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} {:<4} measured={:.6e} bound={:.6e} {}",
                c.name,
                if c.passed { "pass" } else { "FAIL" },
                c.measured,
                c.bound,
                c.note
            )?;
        }
        Ok(())
    }
}

/// Ground truth needed to check a model-P certificate.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a> {
    pub v: &'a DenseMatrix,
    pub basis: &'a [usize],
    pub epsilon: f64,
    pub kappa: f64,
    pub beta: f64,
}

/// Checks a model-P certificate against the residual bound (`θ <= 2ε`), the
/// column bounds on `X_opt` and `V X_opt`, and the diagonal lower bound at the
/// basis indices (only when `κ > 0` and `β < 1`).
pub fn verify_certificate(truth: GroundTruth, cert: &Certificate) -> Result<BoundReport> {
    let eps = truth.epsilon;
    let tol = cert.tolerance();
    let mut checks = Vec::new();

    checks.push(BoundCheck {
        name: "residual",
        passed: cert.theta <= 2.0 * eps + tol,
        measured: cert.theta,
        bound: 2.0 * eps + tol,
        note: "theta <= 2 eps".into(),
    });

    let col_bound = if eps < 1.0 { 4.0 * eps / (1.0 - eps) } else { f64::INFINITY };
    let vx = truth.v.matmul(&cert.x_opt)?;
    let n = cert.x_opt.cols();
    let worst_col = (0..n).map(|i| l1_norm(cert.x_opt.col(i))).fold(0.0, f64::max);
    let worst_fit = (0..n).map(|i| crate::linalg::l1_distance(truth.v.col(i), vx.col(i))).fold(0.0, f64::max);
    checks.push(BoundCheck {
        name: "column-mass",
        passed: worst_col <= 1.0 + col_bound + tol,
        measured: worst_col,
        bound: 1.0 + col_bound + tol,
        note: "max_i |X(:,i)|_1 <= 1 + 4eps/(1-eps)".into(),
    });
    checks.push(BoundCheck {
        name: "clean-fit",
        passed: worst_fit <= col_bound + tol,
        measured: worst_fit,
        bound: col_bound + tol,
        note: "max_i |v_i - V X(:,i)|_1 <= 4eps/(1-eps)".into(),
    });

    if truth.kappa > 0.0 && truth.beta < 1.0 && eps < 1.0 {
        let lower = 1.0 - 8.0 * eps / (truth.kappa * (1.0 - truth.beta) * (1.0 - eps));
        let worst = truth.basis.iter().map(|&i| cert.p[i]).fold(f64::INFINITY, f64::min);
        checks.push(BoundCheck {
            name: "basis-diagonal",
            passed: worst >= lower - tol,
            measured: worst,
            bound: lower - tol,
            note: "min_basis p(i) >= 1 - 8eps/(kappa(1-beta)(1-eps))".into(),
        });
    } else {
        checks.push(BoundCheck {
            name: "basis-diagonal",
            passed: true,
            measured: f64::NAN,
            bound: f64::NAN,
            note: "skipped: needs kappa > 0, beta < 1, eps < 1".into(),
        });
    }
    Ok(BoundReport { checks })
}
