//! Dense matrix and rank-4 tensor algebra used by every other module.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything here can be shared freely across threads.
//! Dimensions in practice stay below ~50, so the kernels are plain dense
//! loops with no blocking.

mod eigen;
mod tensor;

pub use eigen::{
    psd_dominates, psd_fractional_power, sym_exp, trace_exp, SymEigen, TraceExp, TRACE_EXP_CAP,
};
pub use tensor::Rank4Tensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {context}: {left} vs {right}")]
    DimMismatch {
        context: &'static str,
        left: String,
        right: String,
    },
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyShape { rows: usize, cols: usize },
    #[error("non-finite entry at position {0:?}")]
    NonFinite((usize, usize)),
    #[error("matrix is not symmetric at entry {0:?}")]
    NotSymmetric((usize, usize)),
    #[error("unsupported vector norm exponent p={0}, only p in {{1, 2}}")]
    UnsupportedNorm(usize),
    #[error("jagged rows: row {row} has {len} entries, expected {expected}")]
    JaggedRows {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("symmetric eigensolver did not converge within the sweep cap")]
    EigenNonConvergence,
    #[error("matrix exponential overflow: a scaled eigenvalue exceeds the cap")]
    ExpOverflow,
}

/// Dense real matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Matrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds a matrix from nested rows, validating shape and finiteness.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, LinalgError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(LinalgError::EmptyShape {
                rows: rows.len(),
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        let cols = rows[0].len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::JaggedRows {
                    row: i,
                    len: r.len(),
                    expected: cols,
                });
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite((i, j)));
                }
            }
        }
        let data = rows.concat();
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    fn check_same_shape(&self, other: &Matrix, context: &'static str) -> Result<(), LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimMismatch {
                context,
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_same_shape(other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_same_shape(other, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// In-place `self += c * other`; shapes must already agree.
    pub fn add_scaled_assign(&mut self, other: &Matrix, c: f64) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimMismatch {
                context: "matmul",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// Entry-wise (Hadamard) product.
    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.check_same_shape(other, "hadamard")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Entry-wise k-th power.
    pub fn hadamard_pow(&self, k: u32) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.powi(k as i32)).collect(),
        }
    }

    fn vector_lp(entries: impl Iterator<Item = f64>, p: usize) -> Result<f64, LinalgError> {
        match p {
            1 => Ok(entries.map(f64::abs).sum()),
            2 => Ok(entries.map(|v| v * v).sum::<f64>().sqrt()),
            _ => Err(LinalgError::UnsupportedNorm(p)),
        }
    }

    /// Maximum over rows of the row vector l_p norm.
    pub fn max_row_lp_norm(&self, p: usize) -> Result<f64, LinalgError> {
        let mut best = 0.0f64;
        for i in 0..self.rows {
            let norm = Self::vector_lp((0..self.cols).map(|j| self.get(i, j)), p)?;
            best = best.max(norm);
        }
        Ok(best)
    }

    /// Maximum over columns of the column vector l_p norm.
    pub fn max_col_lp_norm(&self, p: usize) -> Result<f64, LinalgError> {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let norm = Self::vector_lp((0..self.rows).map(|i| self.get(i, j)), p)?;
            best = best.max(norm);
        }
        Ok(best)
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Operator norm (largest singular value), computed as the square root of
    /// the top eigenvalue of the smaller Gram matrix.
    pub fn operator_norm(&self) -> f64 {
        let gram = if self.rows <= self.cols {
            self.gram_left()
        } else {
            self.gram_right()
        };
        gram.lambda_max().max(0.0).sqrt()
    }

    /// `X * X^T` with exactly symmetric output.
    pub fn gram_left(&self) -> SymMatrix {
        SymMatrix::from_fn_lower(self.rows, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * self.get(j, k)).sum()
        })
    }

    /// `X^T * X` with exactly symmetric output.
    pub fn gram_right(&self) -> SymMatrix {
        SymMatrix::from_fn_lower(self.cols, |i, j| {
            (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum()
        })
    }

    /// Column-stacking vectorization.
    pub fn vectorize(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        debug_assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = LinalgError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_nested()
    }
}

/// Symmetric matrix with construction-enforced exact symmetry:
/// `get(i, j) == get(j, i)` holds bitwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimensions must be >= 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn_lower(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = SymMatrix::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = v;
        }
        m
    }

    /// Evaluates `f` on the lower triangle (i >= j) and mirrors the result,
    /// so symmetry holds bitwise whatever `f` does.
    pub fn from_fn_lower(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "matrix dimensions must be >= 1");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data }
    }

    /// Checks exact entry-wise symmetry of `m`.
    pub fn try_from_matrix(m: &Matrix) -> Result<Self, LinalgError> {
        if m.rows() != m.cols() {
            return Err(LinalgError::DimMismatch {
                context: "symmetric from square",
                left: m.rows().to_string(),
                right: m.cols().to_string(),
            });
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m.get(i, j).to_bits() != m.get(j, i).to_bits() {
                    return Err(LinalgError::NotSymmetric((i, j)));
                }
            }
        }
        Ok(SymMatrix {
            dim: m.rows(),
            data: m.entries().to_vec(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimMismatch {
                context: "sym add",
                left: self.dim.to_string(),
                right: other.dim.to_string(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymMatrix {
            dim: self.dim,
            data,
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimMismatch {
                context: "sym sub",
                left: self.dim.to_string(),
                right: other.dim.to_string(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SymMatrix {
            dim: self.dim,
            data,
        })
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// In-place `self += c * other`; dimensions must already agree.
    pub fn add_scaled_assign(&mut self, other: &SymMatrix, c: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// Assembles `[[top, 0], [0, bottom]]`.
    pub fn block_diagonal(top: &SymMatrix, bottom: &SymMatrix) -> SymMatrix {
        let dim = top.dim + bottom.dim;
        let mut out = SymMatrix::zeros(dim);
        for i in 0..top.dim {
            for j in 0..top.dim {
                out.data[i * dim + j] = top.get(i, j);
            }
        }
        for i in 0..bottom.dim {
            for j in 0..bottom.dim {
                out.data[(top.dim + i) * dim + (top.dim + j)] = bottom.get(i, j);
            }
        }
        out
    }

    /// Extracts the leading `k x k` principal block.
    pub fn leading_block(&self, k: usize) -> SymMatrix {
        assert!(k >= 1 && k <= self.dim);
        SymMatrix::from_fn_lower(k, |i, j| self.get(i, j))
    }

    /// Extracts the trailing `(dim - k) x (dim - k)` principal block.
    pub fn trailing_block(&self, k: usize) -> SymMatrix {
        assert!(k < self.dim);
        SymMatrix::from_fn_lower(self.dim - k, |i, j| self.get(k + i, k + j))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        self.as_matrix().to_nested()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = LinalgError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        let m = Matrix::from_rows(rows)?;
        SymMatrix::try_from_matrix(&m)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_nested()
    }
}

/// Symmetric dilation `[[0, X], [X^T, 0]]`. Its top eigenvalue equals the
/// operator norm of `X`, which lets spectral-norm statements go through
/// symmetric eigenvalue machinery.
pub fn dilation(x: &Matrix) -> SymMatrix {
    let (m, n) = x.shape();
    SymMatrix::from_fn_lower(m + n, |i, j| {
        if i >= m && j < m {
            // lower-left block holds X^T
            x.get(j, i - m)
        } else {
            0.0
        }
    })
}
