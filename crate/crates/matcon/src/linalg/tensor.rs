//! Dense rank-4 tensors viewed as linear maps from `p x q` matrices to
//! `m x n` matrices.

use serde::{Deserialize, Serialize};

use super::{LinalgError, Matrix};

type Nested4 = Vec<Vec<Vec<Vec<f64>>>>;

/// Dense `m x n x p x q` tensor, indexed `(i, j; k, l)`. Acts on a `p x q`
/// matrix by contracting the trailing index pair:
/// `(T o A)[i, j] = sum_{k, l} T[i, j; k, l] * A[k, l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Nested4", into = "Nested4")]
pub struct Rank4Tensor {
    m: usize,
    n: usize,
    p: usize,
    q: usize,
    data: Vec<f64>,
}

impl Rank4Tensor {
    pub fn zeros(m: usize, n: usize, p: usize, q: usize) -> Self {
        assert!(
            m >= 1 && n >= 1 && p >= 1 && q >= 1,
            "tensor dimensions must be >= 1"
        );
        Rank4Tensor {
            m,
            n,
            p,
            q,
            data: vec![0.0; m * n * p * q],
        }
    }

    pub fn from_fn(
        m: usize,
        n: usize,
        p: usize,
        q: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Rank4Tensor::zeros(m, n, p, q);
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    for l in 0..q {
                        let idx = t.index(i, j, k, l);
                        t.data[idx] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// Tensor of the identity map: requires `m == p`, `n == q`;
    /// `T[i, j; k, l] = 1` iff `i == k` and `j == l`.
    pub fn slicewise_identity(m: usize, n: usize) -> Self {
        Rank4Tensor::from_fn(m, n, m, n, |i, j, k, l| {
            if i == k && j == l {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn from_nested(nested: Nested4) -> Result<Self, LinalgError> {
        let m = nested.len();
        let n = nested.first().map_or(0, Vec::len);
        let p = nested
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        let q = nested
            .first()
            .and_then(|r| r.first())
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        if m == 0 || n == 0 || p == 0 || q == 0 {
            return Err(LinalgError::EmptyShape { rows: m, cols: n });
        }
        let mut t = Rank4Tensor::zeros(m, n, p, q);
        for (i, plane) in nested.iter().enumerate() {
            if plane.len() != n {
                return Err(LinalgError::JaggedRows {
                    row: i,
                    len: plane.len(),
                    expected: n,
                });
            }
            for (j, block) in plane.iter().enumerate() {
                if block.len() != p {
                    return Err(LinalgError::JaggedRows {
                        row: j,
                        len: block.len(),
                        expected: p,
                    });
                }
                for (k, row) in block.iter().enumerate() {
                    if row.len() != q {
                        return Err(LinalgError::JaggedRows {
                            row: k,
                            len: row.len(),
                            expected: q,
                        });
                    }
                    for (l, &v) in row.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(LinalgError::NonFinite((i, j)));
                        }
                        let idx = t.index(i, j, k, l);
                        t.data[idx] = v;
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn to_nested(&self) -> Nested4 {
        (0..self.m)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        (0..self.p)
                            .map(|k| (0..self.q).map(|l| self.get(i, j, k, l)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.p + k) * self.q + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.index(i, j, k, l)]
    }

    /// `(m, n, p, q)`.
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.m, self.n, self.p, self.q)
    }

    /// Output shape of the linear map.
    pub fn out_shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Input shape of the linear map.
    pub fn in_shape(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    /// The `m x n` matrix obtained by fixing the trailing indices at `(k, l)`.
    pub fn slice(&self, k: usize, l: usize) -> Matrix {
        Matrix::from_fn(self.m, self.n, |i, j| self.get(i, j, k, l))
    }

    /// Applies the linear map to a `p x q` matrix.
    pub fn apply(&self, a: &Matrix) -> Result<Matrix, LinalgError> {
        if a.shape() != (self.p, self.q) {
            return Err(LinalgError::DimMismatch {
                context: "tensor apply",
                left: format!("{}x{}", self.p, self.q),
                right: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let mut out = Matrix::zeros(self.m, self.n);
        for i in 0..self.m {
            for j in 0..self.n {
                let mut acc = 0.0;
                for k in 0..self.p {
                    for l in 0..self.q {
                        acc += self.get(i, j, k, l) * a.get(k, l);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// Adds `c * slice(k, l)` into `out`; the event-driven integrator uses
    /// this because a single-entry driver jump only touches one slice.
    pub fn add_slice_scaled(&self, out: &mut Matrix, k: usize, l: usize, c: f64) {
        debug_assert_eq!(out.shape(), (self.m, self.n));
        for i in 0..self.m {
            for j in 0..self.n {
                let v = out.get(i, j) + c * self.get(i, j, k, l);
                out.set(i, j, v);
            }
        }
    }

    /// Transposed map: `T' o A == (T o A)^T`, i.e. `T'[i, j; k, l] = T[j, i; k, l]`.
    pub fn transpose(&self) -> Rank4Tensor {
        Rank4Tensor::from_fn(self.n, self.m, self.p, self.q, |i, j, k, l| {
            self.get(j, i, k, l)
        })
    }

    /// Slice-by-slice matrix product: `(T T')[.,.;k,l] = T[.,.;k,l] * T'[.,.;k,l]`.
    pub fn compose(&self, other: &Rank4Tensor) -> Result<Rank4Tensor, LinalgError> {
        if self.n != other.m || self.p != other.p || self.q != other.q {
            return Err(LinalgError::DimMismatch {
                context: "tensor compose",
                left: format!("{}x{}x{}x{}", self.m, self.n, self.p, self.q),
                right: format!("{}x{}x{}x{}", other.m, other.n, other.p, other.q),
            });
        }
        let mut out = Rank4Tensor::zeros(self.m, other.n, self.p, self.q);
        for k in 0..self.p {
            for l in 0..self.q {
                for i in 0..self.m {
                    for j in 0..other.n {
                        let mut acc = 0.0;
                        for a in 0..self.n {
                            acc += self.get(i, a, k, l) * other.get(a, j, k, l);
                        }
                        let idx = out.index(i, j, k, l);
                        out.data[idx] = acc;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Maximum operator norm over the `p * q` slices.
    pub fn max_slice_op_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for k in 0..self.p {
            for l in 0..self.q {
                best = best.max(self.slice(k, l).operator_norm());
            }
        }
        best
    }

    pub fn add(&self, other: &Rank4Tensor) -> Result<Rank4Tensor, LinalgError> {
        if self.dims() != other.dims() {
            return Err(LinalgError::DimMismatch {
                context: "tensor add",
                left: format!("{:?}", self.dims()),
                right: format!("{:?}", other.dims()),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Rank4Tensor {
            m: self.m,
            n: self.n,
            p: self.p,
            q: self.q,
            data,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl TryFrom<Nested4> for Rank4Tensor {
    type Error = LinalgError;
    fn try_from(nested: Nested4) -> Result<Self, Self::Error> {
        Rank4Tensor::from_nested(nested)
    }
}

impl From<Rank4Tensor> for Nested4 {
    fn from(t: Rank4Tensor) -> Self {
        t.to_nested()
    }
}
