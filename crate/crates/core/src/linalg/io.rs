//! Plain-text matrix container.
//!
//! ```text
//! %%hottopixx-matrix v1
//! dtype f64
//! rows <rows>
//! cols <cols>
//! <value>        one line per entry, column-major order
//! ```
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! reading a file back reproduces every entry bit for bit. Lines starting with
//! `#` after the magic line are comments.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

pub const MATRIX_MAGIC: &str = "%%hottopixx-matrix v1";

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut s = String::with_capacity(24 * m.as_slice().len() + 64);
    s.push_str(MATRIX_MAGIC);
    s.push('\n');
    s.push_str(&format!("dtype f64\nrows {}\ncols {}\n", m.rows(), m.cols()));
    for v in m.as_slice() {
        s.push_str(&format!("{v:?}\n"));
    }
    s
}

pub fn parse_matrix(text: &str, origin: &Path) -> Result<DenseMatrix> {
    let bad = |msg: String| Error::Malformed { path: origin.to_path_buf(), msg };
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some(MATRIX_MAGIC) => {}
        other => return Err(bad(format!("expected `{MATRIX_MAGIC}`, found {other:?}"))),
    }
    let mut lines = lines.filter(|l| !l.starts_with('#'));
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| bad(format!("missing `{key}` line")))?;
        let (k, v) = line.split_once(char::is_whitespace).ok_or_else(|| bad(format!("bad header line `{line}`")))?;
        if k != key {
            return Err(bad(format!("expected `{key}`, found `{k}`")));
        }
        Ok(v.trim().to_string())
    };
    let dtype = header("dtype")?;
    if dtype != "f64" {
        return Err(bad(format!("unsupported dtype {dtype}")));
    }
    let rows: usize = header("rows")?.parse().map_err(|e| bad(format!("rows: {e}")))?;
    let cols: usize = header("cols")?.parse().map_err(|e| bad(format!("cols: {e}")))?;
    let data = lines
        .map(|l| l.parse::<f64>().map_err(|e| bad(format!("value `{l}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(bad(format!("expected {} values, found {}", rows * cols, data.len())));
    }
    if rows == 0 || cols == 0 {
        return Ok(DenseMatrix::zeros(rows, cols));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    parse_matrix(&text, path)
}
