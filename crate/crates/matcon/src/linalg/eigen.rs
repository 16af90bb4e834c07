//! Symmetric eigen-analysis: the single spectral primitive behind operator
//! norms, trace exponentials, psd ordering and fractional matrix powers.

use super::{LinalgError, Matrix, SymMatrix};

const MAX_SWEEPS: usize = 64;

/// Eigenvalue cap above which `exp` would overflow the f64 range by a wide
/// margin; hitting it is reported as an explicit overflow instead of +inf
/// propagating silently.
pub const TRACE_EXP_CAP: f64 = 700.0;

/// Eigendecomposition of a symmetric matrix: `S = Q diag(values) Q^T` with
/// eigenvalues sorted in descending order and orthonormal columns in `Q`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// Rebuilds `Q f(diag) Q^T` with exact output symmetry.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        SymMatrix::from_fn_lower(d, |i, j| {
            (0..d)
                .map(|k| self.vectors.get(i, k) * fv[k] * self.vectors.get(j, k))
                .sum()
        })
    }
}

impl SymMatrix {
    /// Full eigendecomposition by cyclic Jacobi rotations.
    pub fn eigen(&self) -> Result<SymEigen, LinalgError> {
        let (values, vectors) = jacobi(self, true)?;
        Ok(SymEigen {
            values,
            vectors: vectors.expect("vectors requested"),
        })
    }

    /// Eigenvalues only (descending), skipping eigenvector accumulation.
    pub fn eigenvalues(&self) -> Result<Vec<f64>, LinalgError> {
        Ok(jacobi(self, false)?.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues().expect("eigenvalue iteration cap")[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self
            .eigenvalues()
            .expect("eigenvalue iteration cap")
            .last()
            .unwrap()
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigenvalues()
            .expect("eigenvalue iteration cap")
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Cyclic Jacobi for symmetric matrices. Works on a full dense copy; each
/// sweep visits every super-diagonal pair once.
fn jacobi(s: &SymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Matrix>), LinalgError> {
    let n = s.dim();
    let mut a = s.as_matrix();
    let mut q = want_vectors.then(|| Matrix::identity(n));

    if n == 1 {
        return Ok((vec![a.get(0, 0)], q));
    }

    let scale = a.frobenius_norm();
    let tol = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = {
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    acc += a.get(i, j) * a.get(i, j);
                }
            }
            acc.sqrt()
        };
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a.get(p, r);
                if apr.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a.get(p, p);
                let arr = a.get(r, r);
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                // rows/columns p and r
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akr = a.get(k, r);
                    a.set(k, p, c * akp - sn * akr);
                    a.set(k, r, sn * akp + c * akr);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let ark = a.get(r, k);
                    a.set(p, k, c * apk - sn * ark);
                    a.set(r, k, sn * apk + c * ark);
                }
                if let Some(q) = q.as_mut() {
                    for k in 0..n {
                        let qkp = q.get(k, p);
                        let qkr = q.get(k, r);
                        q.set(k, p, c * qkp - sn * qkr);
                        q.set(k, r, sn * qkp + c * qkr);
                    }
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::EigenNonConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let vectors = q.map(|q| Matrix::from_fn(n, n, |i, j| q.get(i, order[j])));
    Ok((values, vectors))
}

/// Trace exponential result with an explicit overflow flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceExp {
    Finite(f64),
    Overflow,
}

impl TraceExp {
    pub fn value(self) -> f64 {
        match self {
            TraceExp::Finite(v) => v,
            TraceExp::Overflow => f64::INFINITY,
        }
    }

    pub fn is_overflow(self) -> bool {
        matches!(self, TraceExp::Overflow)
    }
}

/// `tr exp(S)` through the eigendecomposition. Monotone in the psd order.
pub fn trace_exp(s: &SymMatrix) -> TraceExp {
    let values = s.eigenvalues().expect("eigenvalue iteration cap");
    if values[0] > TRACE_EXP_CAP {
        return TraceExp::Overflow;
    }
    TraceExp::Finite(values.iter().map(|&v| v.exp()).sum())
}

/// `exp(S)` as a symmetric matrix; errors when an eigenvalue exceeds the cap.
pub fn sym_exp(s: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let eigen = s.eigen()?;
    if eigen.values[0] > TRACE_EXP_CAP {
        return Err(LinalgError::ExpOverflow);
    }
    Ok(eigen.assemble(f64::exp))
}

/// `S^power` for real `power > 0` on a psd-up-to-roundoff matrix. Negative
/// eigenvalues are clamped to zero (Gram matrices are psd by construction,
/// so any negative mass is roundoff).
pub fn psd_fractional_power(s: &SymMatrix, power: f64) -> Result<SymMatrix, LinalgError> {
    let eigen = s.eigen()?;
    Ok(eigen.assemble(|v| if v <= 0.0 { 0.0 } else { v.powf(power) }))
}

/// Whether `lower` precedes `upper` in the psd order, up to `tol`:
/// `lambda_min(upper - lower) >= -tol * max(1, ||upper - lower||_op)`.
pub fn psd_dominates(lower: &SymMatrix, upper: &SymMatrix, tol: f64) -> Result<bool, LinalgError> {
    let gap = upper.sub(lower)?;
    let values = gap.eigenvalues()?;
    let norm = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(*values.last().unwrap() >= -tol * norm.max(1.0))
}
