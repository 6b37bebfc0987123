//! Synthetic separable instances `A = W [I, H̄] Π + N` and their conditioning
//! parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{
    induced_l1_norm, l1_distance, normalize_columns_l1, read_matrix, reduced_svd, sample_dirichlet, write_matrix,
    DenseMatrix, RngStream, RNG_ALGORITHM,
};
use crate::models::{construct_x0, GroundTruth};
use crate::solvers::solve_l1_regression_nonneg;

/// Uniform `[0, 1]` entries, columns scaled to unit L1 norm.
pub fn gen_w_normal(d: usize, r: usize, rng: &mut RngStream) -> Result<DenseMatrix> {
    check_dims(d, r)?;
    normalize_columns_l1(&rng.uniform_matrix(d, r))
}

/// Ill-conditioned basis: a normal draw whose singular values are replaced by
/// `α^0, …, α^(r-1)` with `α^(r-1) = 10^-c`, then clamped to be nonnegative
/// and renormalized.
pub fn gen_w_illcond(d: usize, r: usize, c: f64, rng: &mut RngStream) -> Result<DenseMatrix> {
    if !(c > 0.0) {
        return Err(Error::BadParameter(format!("conditioning exponent c = {c}")));
    }
    let base = gen_w_normal(d, r, rng)?;
    let mut svd = reduced_svd(&base)?;
    svd.sigma = illcond_spectrum(r, c);
    let rebuilt = svd.reconstruct().map(|v| v.max(0.0));
    normalize_columns_l1(&rebuilt)
}

/// `(α^0, …, α^(r-1))` with `α^(r-1) = 10^-c`.
pub fn illcond_spectrum(r: usize, c: f64) -> Vec<f64> {
    if r == 1 {
        return vec![1.0];
    }
    let alpha = 10f64.powf(-c / (r - 1) as f64);
    (0..r).map(|i| alpha.powi(i as i32)).collect()
}

/// `H̄` (r × (n - r)) with Dirichlet columns sharing one parameter vector drawn
/// uniformly from `(0, 1]`, and the identity-first column layout.
pub fn gen_h(r: usize, n: usize, rng: &mut RngStream) -> Result<(DenseMatrix, Vec<usize>)> {
    if n <= r || r == 0 {
        return Err(Error::Dimension(format!("need n > r >= 1, got n = {n}, r = {r}")));
    }
    let params: Vec<f64> = (0..r).map(|_| rng.uniform_open_zero()).collect();
    let cols = (0..n - r).map(|_| sample_dirichlet(&params, rng)).collect::<Result<Vec<_>>>()?;
    Ok((DenseMatrix::from_columns(&cols)?, (0..n).collect()))
}

/// Like [`gen_h`], but the first `copies` columns of `H̄` are unit vectors
/// cycling through the basis, so the data holds exact duplicates of basis
/// columns (`β = 1`).
pub fn gen_h_with_duplicates(r: usize, n: usize, copies: usize, rng: &mut RngStream) -> Result<(DenseMatrix, Vec<usize>)> {
    let (mut hbar, perm) = gen_h(r, n, rng)?;
    if copies > hbar.cols() {
        return Err(Error::BadParameter(format!("{copies} duplicates do not fit in {} columns", hbar.cols())));
    }
    for c in 0..copies {
        let col = hbar.col_mut(c);
        col.iter_mut().for_each(|v| *v = 0.0);
        col[c % r] = 1.0;
    }
    Ok((hbar, perm))
}

/// Gaussian noise rescaled to induced L1 norm `delta`.
pub fn gen_noise(d: usize, n: usize, delta: f64, rng: &mut RngStream) -> Result<DenseMatrix> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::BadParameter(format!("noise level {delta}")));
    }
    let g = rng.normal_matrix(d, n);
    let norm = induced_l1_norm(&g);
    if delta == 0.0 || norm == 0.0 {
        return Ok(DenseMatrix::zeros(d, n));
    }
    Ok(g.scale(delta / norm))
}

/// `min_j min_{z >= 0} ‖w_j - W(:, others) z‖₁`.
pub fn compute_kappa(w: &DenseMatrix) -> Result<f64> {
    let r = w.cols();
    if r < 2 {
        return Err(Error::Dimension("kappa needs at least two columns".into()));
    }
    let mut best = f64::INFINITY;
    for j in 0..r {
        let others: Vec<usize> = (0..r).filter(|&k| k != j).collect();
        let (_, v) = solve_l1_regression_nonneg(&w.select_columns(&others)?, w.col(j))?;
        best = best.min(v);
    }
    Ok(best.max(0.0))
}

/// Smallest pairwise L1 distance between basis columns.
pub fn compute_omega(w: &DenseMatrix) -> Result<f64> {
    let r = w.cols();
    if r < 2 {
        return Err(Error::Dimension("omega needs at least two columns".into()));
    }
    let mut best = f64::INFINITY;
    for a in 0..r {
        for b in a + 1..r {
            best = best.min(l1_distance(w.col(a), w.col(b)));
        }
    }
    Ok(best)
}

/// Largest entry of `H̄` (zero when it has no columns).
pub fn compute_beta(hbar: &DenseMatrix) -> f64 {
    hbar.as_slice().iter().copied().fold(0.0, f64::max)
}

/// `σ_max / σ_min` of `W`.
pub fn cond_ratio(w: &DenseMatrix) -> Result<f64> {
    Ok(reduced_svd(w)?.condition_ratio())
}

fn check_dims(d: usize, r: usize) -> Result<()> {
    if r == 0 || d < r {
        return Err(Error::Dimension(format!("need d >= r >= 1, got d = {d}, r = {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SyntheticInstance {
    pub w: DenseMatrix,
    pub hbar: DenseMatrix,
    /// `permutation[c]` is the column of `[I, H̄]` placed at position `c`.
    pub permutation: Vec<usize>,
    /// Positions of the identity block, ascending.
    pub basis: Vec<usize>,
    pub v: DenseMatrix,
    pub noise: DenseMatrix,
    pub a: DenseMatrix,
    pub delta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub omega: f64,
    pub beta: f64,
    pub cond_ratio: f64,
    pub seed: u64,
}

impl SyntheticInstance {
    /// Builds `V = W [I, H̄] Π`, `A = V + N` and measures the parameters.
    pub fn assemble(w: DenseMatrix, hbar: DenseMatrix, permutation: Vec<usize>, noise: DenseMatrix, delta: f64, seed: u64) -> Result<Self> {
        let (d, r) = w.shape();
        let n = r + hbar.cols();
        if hbar.rows() != r || noise.shape() != (d, n) || permutation.len() != n {
            return Err(Error::Dimension("instance parts do not fit together".into()));
        }
        let mut seen = vec![false; n];
        for &p in &permutation {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::BadParameter("permutation is not a bijection".into()));
            }
        }
        let block = w.hcat(&w.matmul(&hbar)?)?;
        let v = block.select_columns(&permutation)?;
        let a = v.add(&noise)?;
        let mut basis: Vec<usize> = (0..n).filter(|&c| permutation[c] < r).collect();
        basis.sort_unstable();
        let (kappa, omega) = if r >= 2 { (compute_kappa(&w)?, compute_omega(&w)?) } else { (1.0, 2.0) };
        Ok(Self {
            epsilon: induced_l1_norm(&noise),
            beta: compute_beta(&hbar),
            cond_ratio: cond_ratio(&w)?,
            kappa,
            omega,
            w,
            hbar,
            permutation,
            basis,
            v,
            noise,
            a,
            delta,
            seed,
        })
    }

    pub fn d(&self) -> usize {
        self.a.rows()
    }
    pub fn n(&self) -> usize {
        self.a.cols()
    }
    pub fn r(&self) -> usize {
        self.w.cols()
    }

    pub fn x0(&self) -> Result<DenseMatrix> {
        construct_x0(&self.hbar, &self.permutation)
    }

    pub fn truth(&self) -> GroundTruth<'_> {
        GroundTruth { v: &self.v, basis: &self.basis, epsilon: self.epsilon, kappa: self.kappa, beta: self.beta }
    }

    /// The same instance with a different noise matrix.
    pub fn with_noise(&self, noise: DenseMatrix, delta: f64) -> Result<Self> {
        let a = self.v.add(&noise)?;
        Ok(Self { epsilon: induced_l1_norm(&noise), a, noise, delta, ..self.clone() })
    }

    /// Writes `manifest.txt` plus `W.mat`, `Hbar.mat`, `N.mat` and `A.mat`.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest.txt"), self.manifest())?;
        write_matrix(&dir.join("W.mat"), &self.w)?;
        write_matrix(&dir.join("Hbar.mat"), &self.hbar)?;
        write_matrix(&dir.join("N.mat"), &self.noise)?;
        write_matrix(&dir.join("A.mat"), &self.a)?;
        Ok(())
    }

    pub fn manifest(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "format hottopixx-instance v1");
        let _ = writeln!(s, "d {}", self.d());
        let _ = writeln!(s, "n {}", self.n());
        let _ = writeln!(s, "r {}", self.r());
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "rng {RNG_ALGORITHM}");
        let _ = writeln!(s, "delta {:?}", self.delta);
        let _ = writeln!(s, "epsilon {:?}", self.epsilon);
        let _ = writeln!(s, "kappa {:?}", self.kappa);
        let _ = writeln!(s, "omega {:?}", self.omega);
        let _ = writeln!(s, "beta {:?}", self.beta);
        let _ = writeln!(s, "cond_ratio {:?}", self.cond_ratio);
        let _ = writeln!(s, "permutation {}", join(&self.permutation));
        let _ = writeln!(s, "basis {}", join(&self.basis));
        s
    }

    pub fn read_bundle(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.txt");
        let text = fs::read_to_string(&path)?;
        let fields = parse_manifest(&text, &path)?;
        let bad = |msg: String| Error::Malformed { path: path.clone(), msg };
        let get = |k: &str| fields.get(k).cloned().ok_or_else(|| bad(format!("missing `{k}`")));
        let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|e| bad(format!("{k}: {e}"))) };
        let permutation = get("permutation")?
            .split(',')
            .map(|t| t.parse::<usize>().map_err(|e| bad(format!("permutation: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let seed: u64 = get("seed")?.parse().map_err(|e| bad(format!("seed: {e}")))?;
        let w = read_matrix(&dir.join("W.mat"))?;
        let hbar = read_matrix(&dir.join("Hbar.mat"))?;
        let noise = read_matrix(&dir.join("N.mat"))?;
        let inst = Self::assemble(w, hbar, permutation, noise, num("delta")?, seed)?;
        let stored_a = read_matrix(&dir.join("A.mat"))?;
        if stored_a.sub(&inst.a)?.max_abs() > 1e-12 {
            return Err(bad("A.mat disagrees with W, Hbar and N".into()));
        }
        Ok(inst)
    }
}

/// Key-value lines `key value`; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Malformed { path: origin.to_path_buf(), msg: format!("bad line `{line}`") })?;
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WMode {
    Normal,
    IllCond { c: f64 },
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub id: u8,
    pub d: usize,
    pub n: usize,
    pub r: usize,
    pub w_mode: WMode,
    pub deltas: Vec<f64>,
    /// Number of `V` draws; each is paired with every `δ`.
    pub trials: usize,
    pub master_seed: u64,
}

impl DatasetSpec {
    /// Dataset `id` (1 normal, 2..=4 ill-conditioned with c = 3, 4, 5) at the
    /// given dimensions with a `points`-point δ grid.
    pub fn new(id: u8, d: usize, n: usize, r: usize, points: usize, trials: usize, master_seed: u64) -> Result<Self> {
        let (w_mode, hi) = match id {
            1 => (WMode::Normal, 1.0),
            2..=4 => (WMode::IllCond { c: f64::from(id) + 1.0 }, 0.5),
            _ => return Err(Error::BadParameter(format!("dataset id {id} not in 1..=4"))),
        };
        let spec = Self { id, d, n, r, w_mode, deltas: log_grid(1e-2, hi, points), trials, master_seed };
        spec.validate()?;
        Ok(spec)
    }

    /// Full scale: d = 30, n = 200, r = 10, 20 δ points, 50 draws.
    pub fn full(id: u8, master_seed: u64) -> Result<Self> {
        Self::new(id, 30, 200, 10, 20, 50, master_seed)
    }

    /// Desk scale: d = 10, n = 30, r = 3.
    pub fn desk(id: u8, master_seed: u64) -> Result<Self> {
        Self::new(id, 10, 30, 3, 10, 4, master_seed)
    }

    /// Trend scale: d = 15, n = 60, r = 5, 10 δ points, 10 draws.
    pub fn trend(id: u8, master_seed: u64) -> Result<Self> {
        Self::new(id, 15, 60, 5, 10, 10, master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 || self.d < self.r || self.n <= self.r || self.trials == 0 || self.deltas.is_empty() {
            return Err(Error::BadParameter(format!(
                "dataset spec d = {}, n = {}, r = {}, trials = {}, {} deltas",
                self.d,
                self.n,
                self.r,
                self.trials,
                self.deltas.len()
            )));
        }
        if self.deltas.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::BadParameter("noise levels must be positive".into()));
        }
        Ok(())
    }

    fn basis_seed(&self, trial: usize) -> u64 {
        crate::linalg::derive_seed(self.master_seed, &[u64::from(self.id), trial as u64])
    }

    /// Draws `W` and `H̄` for one trial; shared by every δ.
    pub fn draw_basis(&self, trial: usize) -> Result<(DenseMatrix, DenseMatrix)> {
        let mut rng = RngStream::new(self.basis_seed(trial));
        let w = match self.w_mode {
            WMode::Normal => gen_w_normal(self.d, self.r, &mut rng)?,
            WMode::IllCond { c } => gen_w_illcond(self.d, self.r, c, &mut rng)?,
        };
        let (hbar, _) = gen_h(self.r, self.n, &mut rng)?;
        Ok((w, hbar))
    }

    /// Instance for `(trial, δ index)`.
    pub fn instance(&self, trial: usize, delta_index: usize) -> Result<SyntheticInstance> {
        let delta = *self
            .deltas
            .get(delta_index)
            .ok_or(Error::IndexOutOfRange { index: delta_index, len: self.deltas.len() })?;
        let (w, hbar) = self.draw_basis(trial)?;
        let seed = crate::linalg::derive_seed(self.master_seed, &[u64::from(self.id), trial as u64, 1 + delta_index as u64]);
        let noise = gen_noise(self.d, self.n, delta, &mut RngStream::new(seed))?;
        SyntheticInstance::assemble(w, hbar, (0..self.n).collect(), noise, delta, seed)
    }

    /// Dataset manifest: the spec itself plus one line per trial with the
    /// measured parameters.
    pub fn manifest(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "format hottopixx-dataset v1");
        let _ = writeln!(s, "dataset {}", self.id);
        let _ = writeln!(s, "d {}\nn {}\nr {}", self.d, self.n, self.r);
        let _ = writeln!(
            s,
            "w_mode {}",
            match self.w_mode {
                WMode::Normal => "normal".to_string(),
                WMode::IllCond { c } => format!("illcond:{c:?}"),
            }
        );
        let _ = writeln!(s, "deltas {}", self.deltas.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","));
        let _ = writeln!(s, "trials {}", self.trials);
        let _ = writeln!(s, "master_seed {}", self.master_seed);
        let _ = writeln!(s, "rng {RNG_ALGORITHM}");
        for t in 0..self.trials {
            let (w, hbar) = self.draw_basis(t)?;
            let (kappa, omega) = if self.r >= 2 { (compute_kappa(&w)?, compute_omega(&w)?) } else { (1.0, 2.0) };
            let _ = writeln!(
                s,
                "trial.{t} seed={} kappa={kappa:?} omega={omega:?} beta={:?} cond_ratio={:?}",
                self.basis_seed(t),
                compute_beta(&hbar),
                cond_ratio(&w)?
            );
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_w_has_unit_nonnegative_columns() {
        let mut rng = RngStream::new(1);
        let w = gen_w_normal(8, 4, &mut rng).unwrap();
        assert!(w.is_nonnegative());
        for s in w.column_l1_norms() {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn illcond_spectrum_has_requested_ratio() {
        for (r, c) in [(10, 3.0), (5, 4.0), (2, 1.0)] {
            let s = illcond_spectrum(r, c);
            assert!((s[0] / s[r - 1] / 10f64.powf(c) - 1.0).abs() < 1e-12);
        }
        // Before clamping the rebuilt matrix has exactly that spectrum.
        let mut rng = RngStream::new(2);
        let base = gen_w_normal(12, 5, &mut rng).unwrap();
        let mut svd = reduced_svd(&base).unwrap();
        svd.sigma = illcond_spectrum(5, 3.0);
        let again = reduced_svd(&svd.reconstruct()).unwrap();
        assert!((again.condition_ratio() / 1e3 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn h_columns_are_on_the_simplex() {
        let mut rng = RngStream::new(3);
        let (hbar, perm) = gen_h(4, 20, &mut rng).unwrap();
        assert_eq!(perm, (0..20).collect::<Vec<_>>());
        for s in hbar.column_l1_norms() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        let beta = compute_beta(&hbar);
        assert!((0.0..=1.0).contains(&beta));
    }

    #[test]
    fn duplicates_force_beta_one() {
        let mut rng = RngStream::new(3);
        let (hbar, _) = gen_h_with_duplicates(3, 12, 4, &mut rng).unwrap();
        assert_eq!(compute_beta(&hbar), 1.0);
    }

    #[test]
    fn noise_has_requested_norm() {
        let mut rng = RngStream::new(4);
        for delta in [0.1, 0.01] {
            let n = gen_noise(5, 9, delta, &mut rng).unwrap();
            assert!((induced_l1_norm(&n) - delta).abs() < 1e-12);
        }
        let a = gen_noise(3, 3, 0.5, &mut RngStream::new(1)).unwrap();
        let b = gen_noise(3, 3, 0.5, &mut RngStream::new(2)).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() > 0.0);
    }

    #[test]
    fn parameters_of_simple_bases() {
        let i2 = DenseMatrix::identity(2);
        assert!((compute_kappa(&i2).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(compute_omega(&i2).unwrap(), 2.0);
        let dup = DenseMatrix::from_rows(&[&[0.5, 0.5, 1.0], &[0.5, 0.5, 0.0]]).unwrap();
        assert!(compute_kappa(&dup).unwrap() < 1e-12);
        let hbar = DenseMatrix::from_rows(&[&[0.3, 0.0], &[0.7, 1.0]]).unwrap();
        assert_eq!(compute_beta(&hbar), 1.0);
    }

    #[test]
    fn kappa_matches_grid_search() {
        let mut rng = RngStream::new(6);
        let w = gen_w_normal(6, 3, &mut rng).unwrap();
        let kappa = compute_kappa(&w).unwrap();
        let mut grid = f64::INFINITY;
        for j in 0..3 {
            let o: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let eval = |z0: f64, z1: f64| -> f64 {
                (0..6).map(|i| (w[(i, j)] - z0 * w[(i, o[0])] - z1 * w[(i, o[1])]).abs()).sum()
            };
            let mut best = (f64::INFINITY, 0.0, 0.0);
            for a in 0..=300 {
                for b in 0..=300 {
                    let (z0, z1) = (a as f64 / 100.0, b as f64 / 100.0);
                    let v = eval(z0, z1);
                    if v < best.0 {
                        best = (v, z0, z1);
                    }
                }
            }
            for a in -100..=100 {
                for b in -100..=100 {
                    let (z0, z1) = ((best.1 + a as f64 * 1e-4).max(0.0), (best.2 + b as f64 * 1e-4).max(0.0));
                    best.0 = best.0.min(eval(z0, z1));
                }
            }
            grid = grid.min(best.0);
        }
        assert!(kappa <= grid + 1e-12 && grid - kappa < 1e-3, "{kappa} vs {grid}");
        assert!(kappa <= compute_omega(&w).unwrap());
    }

    #[test]
    fn assembled_instance_is_consistent() {
        let spec = DatasetSpec::new(1, 6, 12, 3, 3, 2, 99).unwrap();
        let inst = spec.instance(1, 2).unwrap();
        assert!((inst.epsilon - spec.deltas[2]).abs() < 1e-12);
        assert_eq!(inst.basis, vec![0, 1, 2]);
        let x0 = inst.x0().unwrap();
        assert!(inst.v.sub(&inst.v.matmul(&x0).unwrap()).unwrap().max_abs() < 1e-12);
        for s in inst.v.column_l1_norms() {
            assert!((s - 1.0).abs() < 1e-10);
        }
        assert!(0.0 <= inst.kappa && inst.kappa <= inst.omega && inst.omega <= 2.0 && inst.kappa <= 1.0);
        let residual = induced_l1_norm(&inst.a.sub(&inst.a.matmul(&x0).unwrap()).unwrap());
        assert!(residual <= 2.0 * inst.epsilon + 1e-12);
    }

    #[test]
    fn bundle_roundtrip_and_reproducible_manifest() {
        let spec = DatasetSpec::new(2, 6, 10, 3, 2, 2, 7).unwrap();
        let inst = spec.instance(0, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        inst.write_bundle(dir.path()).unwrap();
        let back = SyntheticInstance::read_bundle(dir.path()).unwrap();
        assert_eq!(back.a.as_slice(), inst.a.as_slice());
        assert_eq!(back.manifest(), inst.manifest());
        assert_eq!(spec.manifest().unwrap(), spec.manifest().unwrap());
    }

    #[test]
    fn permuted_instance_tracks_basis() {
        let mut rng = RngStream::new(5);
        let w = gen_w_normal(5, 2, &mut rng).unwrap();
        let (hbar, _) = gen_h(2, 5, &mut rng).unwrap();
        let perm = vec![2, 0, 4, 1, 3];
        let inst = SyntheticInstance::assemble(w.clone(), hbar, perm, DenseMatrix::zeros(5, 5), 0.0, 0).unwrap();
        assert_eq!(inst.basis, vec![1, 3]);
        assert_eq!(inst.v.col(1), w.col(0));
        assert_eq!(inst.v.col(3), w.col(1));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-2, 1.0, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-2).abs() < 1e-15 && (g[19] - 1.0).abs() < 1e-12);
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-12);
    }
}
