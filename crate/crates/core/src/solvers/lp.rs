use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// `min cᵀx` subject to row constraints `a_i x (≤|=|≥) b_i` and `lo ≤ x ≤ hi`.
///
/// The constraint matrix is held as a `(row, col, value)` triplet list.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// `num_vars` variables with bounds `[0, +inf)` and zero cost.
    pub fn new(num_vars: usize) -> Self {
        Self {
            objective: vec![0.0; num_vars],
            lower: vec![0.0; num_vars],
            upper: vec![f64::INFINITY; num_vars],
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    /// Rows plus finite variable bounds, i.e. the constraint count of the LP
    /// written with every bound as an explicit inequality.
    pub fn num_constraints(&self) -> usize {
        let finite = self.lower.iter().chain(&self.upper).filter(|v| v.is_finite()).count();
        self.num_rows() + finite
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.lower[var] = lo;
        self.upper[var] = hi;
    }

    pub fn add_row(&mut self, entries: &[(usize, f64)], sense: Sense, rhs: f64) -> usize {
        let row = self.rhs.len();
        for &(col, v) in entries {
            if v != 0.0 {
                self.triplets.push((row, col, v));
            }
        }
        self.senses.push(sense);
        self.rhs.push(rhs);
        row
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let m = self.num_rows();
        if self.lower.len() != n || self.upper.len() != n || self.senses.len() != m {
            return Err(Error::Dimension("inconsistent LP vector lengths".into()));
        }
        let mut seen = HashSet::with_capacity(self.triplets.len());
        for &(r, c, v) in &self.triplets {
            if r >= m || c >= n {
                return Err(Error::Dimension(format!("triplet ({r}, {c}) outside {m}x{n}")));
            }
            if !v.is_finite() {
                return Err(Error::BadParameter(format!("non-finite coefficient at ({r}, {c})")));
            }
            if !seen.insert((r, c)) {
                return Err(Error::BadParameter(format!("duplicate triplet ({r}, {c})")));
            }
        }
        for j in 0..n {
            if !(self.lower[j] <= self.upper[j]) || self.lower[j] == f64::INFINITY || self.upper[j] == f64::NEG_INFINITY {
                return Err(Error::BadParameter(format!(
                    "variable {j} has bounds [{}, {}]",
                    self.lower[j], self.upper[j]
                )));
            }
        }
        if self.objective.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(Error::BadParameter("non-finite objective or right-hand side".into()));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.num_rows()];
        for &(r, c, v) in &self.triplets {
            ax[r] += v * x[c];
        }
        let mut worst: f64 = 0.0;
        for (i, (&lhs, &b)) in ax.iter().zip(&self.rhs).enumerate() {
            let viol = match self.senses[i] {
                Sense::Le => lhs - b,
                Sense::Ge => b - lhs,
                Sense::Eq => (lhs - b).abs(),
            };
            worst = worst.max(viol);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    /// Fixed-format MPS text for cross-checking with external solvers.
    ///
    /// Rows are named `R<i>`, columns `C<j>`, the objective `COST`; numbers are
    /// shortened to fit the 12-character fields.
    pub fn to_mps(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME          {}", truncate(name, 8));
        out.push_str("ROWS\n N  COST\n");
        for (i, s) in self.senses.iter().enumerate() {
            let t = match s {
                Sense::Le => 'L',
                Sense::Eq => 'E',
                Sense::Ge => 'G',
            };
            let _ = writeln!(out, " {t}  R{i}");
        }
        out.push_str("COLUMNS\n");
        let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.num_vars()];
        for &(r, c, v) in &self.triplets {
            by_col[c].push((r, v));
        }
        for (j, entries) in by_col.iter_mut().enumerate() {
            entries.sort_by_key(|e| e.0);
            let col = format!("C{j}");
            if self.objective[j] != 0.0 || entries.is_empty() {
                let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col, "COST", mps_num(self.objective[j]));
            }
            for &(r, v) in entries.iter() {
                let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", col, format!("R{r}"), mps_num(v));
            }
        }
        out.push_str("RHS\n");
        for (i, &b) in self.rhs.iter().enumerate() {
            if b != 0.0 {
                let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{i}"), mps_num(b));
            }
        }
        out.push_str("BOUNDS\n");
        for j in 0..self.num_vars() {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            let col = format!("C{j}");
            let mut bound = |kind: &str, v: Option<f64>| {
                let _ = match v {
                    Some(v) => writeln!(out, " {kind} {:<8}  {:<8}  {:>12}", "BND", col, mps_num(v)),
                    None => writeln!(out, " {kind} {:<8}  {:<8}", "BND", col),
                };
            };
            if lo == hi {
                bound("FX", Some(lo));
            } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
                bound("FR", None);
            } else {
                if lo == f64::NEG_INFINITY {
                    bound("MI", None);
                } else if lo != 0.0 {
                    bound("LO", Some(lo));
                }
                if hi.is_finite() {
                    bound("UP", Some(hi));
                }
            }
        }
        out.push_str("ENDATA\n");
        out
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((k, _)) => &s[..k],
        None => s,
    }
}

fn mps_num(v: f64) -> String {
    let s = format!("{v:?}");
    if s.len() <= 12 {
        return s;
    }
    (0..12)
        .rev()
        .map(|p| format!("{v:.p$e}"))
        .find(|s| s.len() <= 12)
        .unwrap_or_else(|| "0".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    /// Round-off pushed the basic solution out of its bounds; the point is
    /// not trustworthy.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest row or bound violation of `x` against the original data.
    pub primal_residual: f64,
    /// Largest reduced-cost sign violation at termination.
    pub dual_residual: f64,
}

impl LpSolution {
    /// Turns any non-optimal status into the matching error.
    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible),
            LpStatus::Unbounded => Err(Error::Unbounded),
            LpStatus::IterLimit => Err(Error::IterLimit(self.iterations)),
            LpStatus::NumericalFailure => Err(Error::NoConvergence { what: "simplex", iterations: self.iterations }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_duplicates_and_bounds() {
        let mut lp = LinearProgram::new(2);
        lp.add_row(&[(0, 1.0), (1, 1.0)], Sense::Le, 1.0);
        assert!(lp.validate().is_ok());
        lp.triplets.push((0, 0, 2.0));
        assert!(lp.validate().is_err());
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(lp.validate().is_err());
    }

    #[test]
    fn constraint_count_includes_finite_bounds() {
        let mut lp = LinearProgram::new(3);
        lp.set_bounds(1, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(2, 0.0, 1.0);
        lp.add_row(&[(0, 1.0)], Sense::Ge, 1.0);
        assert_eq!(lp.num_constraints(), 1 + 1 + 2);
    }

    #[test]
    fn mps_has_sections_and_fixed_widths() {
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![1.0, -0.000123456789123];
        lp.set_bounds(1, f64::NEG_INFINITY, 3.0);
        lp.add_row(&[(0, 1.0), (1, 2.0)], Sense::Ge, 3.0);
        lp.add_row(&[(0, 1.0)], Sense::Eq, 1.0);
        let mps = lp.to_mps("toy");
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(mps.lines().any(|l| l.starts_with(section)), "missing {section}");
        }
        assert!(mps.contains(" G  R0"));
        assert!(mps.contains(" MI BND       C1"));
        for line in mps.lines().filter(|l| l.starts_with("    ")) {
            assert!(line.len() <= 36, "line too wide: {line:?}");
        }
    }
}
