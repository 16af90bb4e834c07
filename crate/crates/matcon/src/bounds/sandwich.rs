//! Closed-form bound quantities for the two-sided factor form
//! `Z_t = int A_s (C_s (Hadamard) dM_s) B_s`, where the rank-4 coefficient
//! factors as `T[i, j; k, l] = A[i, k] B[l, j]`.
//!
//! The block formulas below must agree with the general tensor pipeline on
//! the factored coefficients; the consistency is enforced by tests rather
//! than assumed.

use crate::linalg::{Matrix, SymMatrix};
use crate::piecewise::{merge_breakpoints, PiecewiseProcess};

use super::{check_nonnegative, BoundsError, DriverWeight};

/// Variance rate of the factor form: with `g = ej2 (Hadamard) C^2 (Hadamard)
/// lambda`,
/// top block `A diag[g diag[B B^T] 1] A^T`, bottom block
/// `B^T diag[g^T diag[A^T A] 1] B`.
pub fn variance_rate_sandwich(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    lam: &Matrix,
    ej2: &Matrix,
) -> Result<SymMatrix, BoundsError> {
    let (m, p) = a.shape();
    let (q, n) = b.shape();
    if c.shape() != (p, q) || lam.shape() != (p, q) || ej2.shape() != (p, q) {
        return Err(BoundsError::ShapeMismatch {
            tensor: (p, q),
            weight: c.shape(),
        });
    }
    check_nonnegative(lam, "intensity")?;
    check_nonnegative(ej2, "mark second moment")?;
    let g = ej2.hadamard(&c.hadamard_pow(2))?.hadamard(lam)?;

    // row sums of g weighted by the diagonal of B B^T
    let b_row_sq: Vec<f64> = (0..q)
        .map(|l| (0..n).map(|aa| b.get(l, aa) * b.get(l, aa)).sum())
        .collect();
    let d_top: Vec<f64> = (0..p)
        .map(|k| (0..q).map(|l| g.get(k, l) * b_row_sq[l]).sum())
        .collect();
    let top = SymMatrix::from_fn_lower(m, |i, j| {
        (0..p).map(|k| a.get(i, k) * a.get(j, k) * d_top[k]).sum()
    });

    // column sums of g weighted by the diagonal of A^T A
    let a_col_sq: Vec<f64> = (0..p)
        .map(|k| (0..m).map(|aa| a.get(aa, k) * a.get(aa, k)).sum())
        .collect();
    let d_bottom: Vec<f64> = (0..q)
        .map(|l| (0..p).map(|k| g.get(k, l) * a_col_sq[k]).sum())
        .collect();
    let bottom = SymMatrix::from_fn_lower(n, |i, j| {
        (0..q).map(|l| b.get(l, i) * b.get(l, j) * d_bottom[l]).sum()
    });

    Ok(SymMatrix::block_diagonal(&top, &bottom))
}

/// Jump bound of the factor form:
/// `jmax * sup_s ||A_s||_{inf,2} ||B_s||_{2,inf} ||C_s||_inf`
/// (largest column norm of `A`, largest row norm of `B`).
pub fn jump_bound_sandwich(
    a: &PiecewiseProcess<Matrix>,
    b: &PiecewiseProcess<Matrix>,
    c: &PiecewiseProcess<Matrix>,
    jmax: f64,
    t: f64,
) -> Result<f64, BoundsError> {
    let horizon = a.horizon().min(b.horizon()).min(c.horizon());
    if t > horizon {
        return Err(BoundsError::BeyondHorizon { t, horizon });
    }
    let merged = merge_breakpoints(&[
        a.clipped(horizon)?.breakpoints(),
        b.clipped(horizon)?.breakpoints(),
        c.clipped(horizon)?.breakpoints(),
    ])?;
    let mut best = 0.0f64;
    for w in merged.windows(2) {
        let (start, end) = (w[0], w[1].min(t));
        if end <= start {
            break;
        }
        let piece = a.value_at(start)?.max_col_lp_norm(2)?
            * b.value_at(start)?.max_row_lp_norm(2)?
            * c.value_at(start)?.max_abs_entry();
        best = best.max(piece);
    }
    Ok(jmax * best)
}

/// Exact integral of the factor-form variance rate on `[0, t]`.
pub fn integrated_variance_sandwich(
    a: &PiecewiseProcess<Matrix>,
    b: &PiecewiseProcess<Matrix>,
    c: &PiecewiseProcess<Matrix>,
    driver: &DriverWeight,
    t: f64,
) -> Result<SymMatrix, BoundsError> {
    let mut horizon = a.horizon().min(b.horizon()).min(c.horizon());
    if let DriverWeight::Jump { intensity, .. } = driver {
        horizon = horizon.min(intensity.horizon());
    }
    if t > horizon {
        return Err(BoundsError::BeyondHorizon { t, horizon });
    }
    let mut lists = vec![
        a.clipped(horizon)?,
        b.clipped(horizon)?,
        c.clipped(horizon)?,
    ];
    if let DriverWeight::Jump { intensity, .. } = driver {
        lists.push(intensity.clipped(horizon)?);
    }
    let breakpoint_refs: Vec<&[f64]> = lists.iter().map(|l| l.breakpoints()).collect();
    let merged = merge_breakpoints(&breakpoint_refs)?;

    let m = a.values()[0].rows();
    let n = b.values()[0].cols();
    let (p, q) = c.values()[0].shape();
    let mut acc = SymMatrix::zeros(m + n);
    for w in merged.windows(2) {
        let (start, end) = (w[0], w[1].min(t));
        if end <= start {
            break;
        }
        let (lam, ej2) = match driver {
            DriverWeight::Jump { intensity, marks } => (
                intensity.value_at(start)?.clone(),
                marks.second_moment_matrix(p, q),
            ),
            DriverWeight::Brownian => (Matrix::filled(p, q, 1.0), Matrix::filled(p, q, 1.0)),
        };
        let rate = variance_rate_sandwich(
            a.value_at(start)?,
            b.value_at(start)?,
            c.value_at(start)?,
            &lam,
            &ej2,
        )?;
        acc.add_scaled_assign(&rate, end - start);
    }
    Ok(acc)
}
