//! Diagonal-based column selection: the refined Hottopixx pipeline (dedup,
//! model P, top-r), plus selection through models Q and R.

use crate::error::{Error, Result};
use crate::linalg::{l1_distance, normalize_columns_l1, DenseMatrix};
use crate::models::{solve_model_p, solve_model_q, solve_model_r, Certificate, ModelOptions};

/// Options shared by every selection routine.
#[derive(Debug, Clone)]
pub struct SelectOptions {
    pub model: ModelOptions,
    /// Scale columns to unit L1 norm before solving. `W_out` is always taken
    /// from the caller's matrix.
    pub normalize: bool,
    /// Two columns are duplicates when their L1 distance is at most `tau`.
    pub dedup_tau: f64,
}

impl Default for SelectOptions {
    fn default() -> Self {
        Self { model: ModelOptions::default(), normalize: true, dedup_tau: 0.0 }
    }
}

impl SelectOptions {
    pub fn with_model(model: ModelOptions) -> Self {
        Self { model, ..Self::default() }
    }
}

/// Outcome of [`dedup_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dedup {
    pub reduced: DenseMatrix,
    /// Original index of each kept column, ascending.
    pub keep: Vec<usize>,
    /// `group[i]` is the position in `keep` that original column `i` maps to.
    pub group: Vec<usize>,
}

impl Dedup {
    pub(crate) fn identity(a: &DenseMatrix) -> Self {
        let n = a.cols();
        Self { reduced: a.clone(), keep: (0..n).collect(), group: (0..n).collect() }
    }

    /// Original indices that collapsed onto kept column `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.group.len()).filter(|&i| self.group[i] == k).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Selected columns in the caller's indexing, ascending.
    pub j: Vec<usize>,
    pub w_out: DenseMatrix,
    pub dedup: Dedup,
    /// Certificate of the model solve, on the (normalized, reduced) matrix
    /// that was actually passed to the solver.
    pub certificate: Certificate,
}

/// Collapses columns within L1 distance `tau` of an earlier representative.
/// The first column of each group (lowest index) is kept.
pub fn dedup_columns(a: &DenseMatrix, tau: f64) -> Result<Dedup> {
    if !(tau >= 0.0) {
        return Err(Error::BadParameter(format!("dedup tolerance must be nonnegative, got {tau}")));
    }
    let mut keep: Vec<usize> = Vec::new();
    let mut group = Vec::with_capacity(a.cols());
    for i in 0..a.cols() {
        let col = a.col(i);
        let hit = keep.iter().position(|&k| {
            if tau == 0.0 {
                a.col(k) == col
            } else {
                l1_distance(a.col(k), col) <= tau
            }
        });
        match hit {
            Some(pos) => group.push(pos),
            None => {
                group.push(keep.len());
                keep.push(i);
            }
        }
    }
    let reduced = a.select_columns(&keep)?;
    Ok(Dedup { reduced, keep, group })
}

/// Indices of the `r` largest entries of `p`, ties to the lower index,
/// returned in ascending order.
pub fn top_r_diag(p: &[f64], r: usize) -> Result<Vec<usize>> {
    if r > p.len() {
        return Err(Error::Dimension(format!("cannot take {r} entries from a list of {}", p.len())));
    }
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx.truncate(r);
    idx.sort_unstable();
    Ok(idx)
}

pub(crate) fn prepare(a: &DenseMatrix, normalize: bool) -> Result<DenseMatrix> {
    if normalize {
        normalize_columns_l1(a)
    } else {
        Ok(a.clone())
    }
}

fn finish(a: &DenseMatrix, j: Vec<usize>, dedup: Dedup, certificate: Certificate) -> Result<SelectionResult> {
    let w_out = a.select_columns(&j)?;
    Ok(SelectionResult { j, w_out, dedup, certificate })
}

/// Refined Hottopixx: drop duplicate columns, solve model P on what is left
/// and keep the `r` columns with the largest diagonal.
pub fn refined_hottopixx(a: &DenseMatrix, r: usize, opts: &SelectOptions) -> Result<SelectionResult> {
    if r == 0 {
        return Err(Error::BadParameter("r must be at least 1".into()));
    }
    let prepared = prepare(a, opts.normalize)?;
    let dedup = dedup_columns(&prepared, opts.dedup_tau)?;
    if dedup.keep.len() < r {
        return Err(Error::RankTooLarge { rank: r, distinct: dedup.keep.len() });
    }
    let cert = solve_model_p(&dedup.reduced, r, &opts.model)?;
    let j = top_r_diag(&cert.p, r)?.into_iter().map(|k| dedup.keep[k]).collect();
    finish(a, j, dedup, cert)
}

/// Top-r selection on an already solved model-P certificate over `a`
/// (no dedup step).
pub fn select_from_certificate(a: &DenseMatrix, r: usize, cert: Certificate) -> Result<SelectionResult> {
    if cert.p.len() != a.cols() {
        return Err(Error::Dimension(format!("certificate of size {} for {} columns", cert.p.len(), a.cols())));
    }
    let j = top_r_diag(&cert.p, r)?;
    finish(a, j, Dedup::identity(a), cert)
}

/// The original Hottopixx: model Q with radius `2 eps`, then top-r.
pub fn hottopixx_original(a: &DenseMatrix, r: usize, eps: f64, opts: &SelectOptions) -> Result<SelectionResult> {
    let prepared = prepare(a, opts.normalize)?;
    let cert = solve_model_q(&prepared, r, eps, &opts.model)?;
    let j = top_r_diag(&cert.p, r)?;
    finish(a, j, Dedup::identity(a), cert)
}

/// Indices whose diagonal exceeds `1 - min(1, rho) / 2`, ascending.
pub fn model_r_select(cert: &Certificate, rho: f64) -> Vec<usize> {
    let level = 1.0 - rho.min(1.0) / 2.0;
    (0..cert.p.len()).filter(|&i| cert.p[i] > level).collect()
}

/// Model R followed by [`model_r_select`] with `opts.model.rho`. The result
/// may hold any number of columns.
pub fn model_r_selection(a: &DenseMatrix, eps: f64, opts: &SelectOptions) -> Result<SelectionResult> {
    let prepared = prepare(a, opts.normalize)?;
    let cert = solve_model_r(&prepared, eps, &opts.model)?;
    let j = model_r_select(&cert, opts.model.rho);
    finish(a, j, Dedup::identity(a), cert)
}
