use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Identifier of the generator behind [`RngStream`], recorded in manifests.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Seeded random stream. One stream belongs to one worker.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Stream for a sub-task, seeded from `master` and a path of counters.
    pub fn derived(master: u64, path: &[u64]) -> Self {
        Self::new(derive_seed(master, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform draw on `(0, 1]`.
    pub fn uniform_open_zero(&mut self) -> f64 {
        1.0 - self.inner.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        let g = Gamma::new(shape, 1.0)
            .map_err(|e| Error::BadParameter(format!("gamma shape {shape}: {e}")))?;
        Ok(g.sample(&mut self.inner))
    }

    pub fn uniform_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, cols);
        m.as_mut_slice().iter_mut().for_each(|v| *v = self.uniform());
        m
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(rows, cols);
        m.as_mut_slice().iter_mut().for_each(|v| *v = self.standard_normal());
        m
    }

    /// Uniformly random permutation of `0..n` (Fisher–Yates).
    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.inner.random_range(0..=i);
            p.swap(i, j);
        }
        p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Mixes a master seed with a path of counters (splitmix64 finalizer per step).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    let mut h = splitmix(master);
    for &p in path {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One Dirichlet draw via normalized Gamma variates.
pub fn sample_dirichlet(params: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
    if params.is_empty() {
        return Err(Error::BadParameter("dirichlet needs at least one parameter".into()));
    }
    if let Some(a) = params.iter().find(|&&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::BadParameter(format!("dirichlet parameter {a} is not positive")));
    }
    if params.len() == 1 {
        return Ok(vec![1.0]);
    }
    // Small shapes can underflow every gamma draw to zero; redraw in that case.
    for _ in 0..1000 {
        let mut g = params.iter().map(|&a| rng.gamma(a)).collect::<Result<Vec<_>>>()?;
        let s: f64 = g.iter().sum();
        if s > 0.0 && s.is_finite() {
            g.iter_mut().for_each(|v| *v /= s);
            return Ok(g);
        }
    }
    Err(Error::NoConvergence { what: "dirichlet sampling", iterations: 1000 })
}
