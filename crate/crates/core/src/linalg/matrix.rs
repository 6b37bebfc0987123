use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Column-major dense real matrix.
///
/// Constructors that take caller data reject NaN/Inf entries and empty shapes.
/// Internally produced matrices may have zero columns (e.g. the mixing block of
/// an instance with `n == r`).
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("matrix must be non-empty, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k % rows, col: k / rows });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices. Mostly useful for literals in tests and examples.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let mut data = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * m + i] = v;
            }
        }
        Self::new(m, n, data)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, |c| c.len());
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::Dimension("ragged columns".into()));
        }
        Self::new(m, n, columns.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * rhs`.
    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col(j).iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * rhs`.
    pub fn tr_matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.cols, rhs.cols);
        if self.rows == 0 || self.cols == 0 {
            return Ok(out);
        }
        for (dst, b) in out.data.chunks_exact_mut(self.cols).zip(rhs.data.chunks_exact(rhs.rows)) {
            for (o, a) in dst.iter_mut().zip(self.data.chunks_exact(self.rows)) {
                *o = dot(a, b);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut y);
            }
        }
        Ok(y)
    }

    fn zip_with(&self, rhs: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!(
                "shape {:?} vs {:?}",
                self.shape(),
                rhs.shape()
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Columns in the given order, `A(:, idx)`.
    pub fn select_columns(&self, idx: &[usize]) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for &j in idx {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange { index: j, len: self.cols });
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(Self { rows: self.rows, cols: idx.len(), data })
    }

    /// Horizontal concatenation `[self, rhs]`.
    pub fn hcat(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != rhs.rows {
            return Err(Error::Dimension("hcat row mismatch".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        Ok(Self { rows: self.rows, cols: self.cols + rhs.cols, data })
    }

    pub fn column_l1_norms(&self) -> Vec<f64> {
        (0..self.cols).map(|j| l1_norm(self.col(j))).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6} ", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn l1_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Induced L1 norm: the largest absolute column sum.
pub fn induced_l1_norm(m: &DenseMatrix) -> f64 {
    (0..m.cols()).map(|j| l1_norm(m.col(j))).fold(0.0, f64::max)
}

/// Scales every column to unit L1 norm, preserving signs.
pub fn normalize_columns_l1(m: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = m.clone();
    for j in 0..m.cols() {
        let s = l1_norm(m.col(j));
        if s == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        out.col_mut(j).iter_mut().for_each(|v| *v /= s);
    }
    Ok(out)
}

/// Symmetric matrix of column-to-column L1 distances.
pub fn pairwise_l1_distances(a: &DenseMatrix) -> DenseMatrix {
    let n = a.cols();
    let mut d = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = l1_distance(a.col(i), a.col(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}
