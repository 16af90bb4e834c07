//! Analytic bound quantities for the integral martingale: instantaneous and
//! integrated variance proxies, the uniform jump bound, tail thresholds, the
//! mean bound and the discrete-series variance terms.
//!
//! Everything here is exact over the piecewise-constant coefficient class:
//! time integrals are sums of value-times-length terms, never quadrature.
//! These values are the ground truth the Monte Carlo harness tests against.

mod sandwich;

pub mod presets;

pub use sandwich::{integrated_variance_sandwich, jump_bound_sandwich, variance_rate_sandwich};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, Rank4Tensor, SymMatrix};
use crate::piecewise::{merge_breakpoints, PiecewiseError, PiecewiseProcess};
use crate::sim::JumpMarkSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("tensor input shape {tensor:?} does not match weight shape {weight:?}")]
    ShapeMismatch {
        tensor: (usize, usize),
        weight: (usize, usize),
    },
    #[error("negative weight entry at {entry:?} in {which}")]
    NegativeWeight {
        which: &'static str,
        entry: (usize, usize),
    },
    #[error("time {t} exceeds the coefficient horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("scalar point-process weights must satisfy sup |w| <= 1, got {0}")]
    WeightBoundExceeded(f64),
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `(T T^T) o w` as an exactly symmetric `m x m` matrix:
/// entry `(i, j) = sum_{k,l} w[k,l] sum_a T[i,a;k,l] T[j,a;k,l]`.
fn weighted_gram_left(t: &Rank4Tensor, w: &Matrix) -> SymMatrix {
    let (m, n, p, q) = t.dims();
    SymMatrix::from_fn_lower(m, |i, j| {
        let mut acc = 0.0;
        for k in 0..p {
            for l in 0..q {
                let weight = w.get(k, l);
                if weight == 0.0 {
                    continue;
                }
                let mut dot = 0.0;
                for a in 0..n {
                    dot += t.get(i, a, k, l) * t.get(j, a, k, l);
                }
                acc += weight * dot;
            }
        }
        acc
    })
}

/// `(T^T T) o w` as an exactly symmetric `n x n` matrix.
fn weighted_gram_right(t: &Rank4Tensor, w: &Matrix) -> SymMatrix {
    let (m, n, p, q) = t.dims();
    SymMatrix::from_fn_lower(n, |i, j| {
        let mut acc = 0.0;
        for k in 0..p {
            for l in 0..q {
                let weight = w.get(k, l);
                if weight == 0.0 {
                    continue;
                }
                let mut dot = 0.0;
                for a in 0..m {
                    dot += t.get(a, i, k, l) * t.get(a, j, k, l);
                }
                acc += weight * dot;
            }
        }
        acc
    })
}

fn check_nonnegative(m: &Matrix, which: &'static str) -> Result<(), BoundsError> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m.get(i, j) < 0.0 {
                return Err(BoundsError::NegativeWeight {
                    which,
                    entry: (i, j),
                });
            }
        }
    }
    Ok(())
}

/// Instantaneous variance rate for a jump driver:
/// `blockdiag((T T^T) o w, (T^T T) o w)` with `w = ej2 (Hadamard) C^2
/// (Hadamard) lambda`. Symmetric psd of size `m + n`.
pub fn variance_rate_jump(
    t: &Rank4Tensor,
    c: &Matrix,
    lam: &Matrix,
    ej2: &Matrix,
) -> Result<SymMatrix, BoundsError> {
    if t.in_shape() != c.shape() || c.shape() != lam.shape() || lam.shape() != ej2.shape() {
        return Err(BoundsError::ShapeMismatch {
            tensor: t.in_shape(),
            weight: c.shape(),
        });
    }
    check_nonnegative(lam, "intensity")?;
    check_nonnegative(ej2, "mark second moment")?;
    let w = ej2.hadamard(&c.hadamard_pow(2))?.hadamard(lam)?;
    Ok(SymMatrix::block_diagonal(
        &weighted_gram_left(t, &w),
        &weighted_gram_right(t, &w),
    ))
}

/// Instantaneous variance rate for a Brownian driver: the jump rate with
/// marks and intensity replaced by all-ones.
pub fn variance_rate_brownian(t: &Rank4Tensor, c: &Matrix) -> Result<SymMatrix, BoundsError> {
    let ones = Matrix::filled(c.rows(), c.cols(), 1.0);
    variance_rate_jump(t, c, &ones, &ones)
}

/// What multiplies `C^2` inside the variance rate, per driver family.
#[derive(Debug, Clone, Copy)]
pub enum DriverWeight<'a> {
    Jump {
        intensity: &'a PiecewiseProcess<Matrix>,
        marks: &'a JumpMarkSpec,
    },
    Brownian,
}

fn merged_coefficient_breakpoints(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &DriverWeight,
    t: f64,
) -> Result<Vec<f64>, BoundsError> {
    let mut horizon = tensor.horizon().min(c.horizon());
    if let DriverWeight::Jump { intensity, .. } = driver {
        horizon = horizon.min(intensity.horizon());
    }
    if t > horizon {
        return Err(BoundsError::BeyondHorizon { t, horizon });
    }
    let tensor = tensor.clipped(horizon)?;
    let c = c.clipped(horizon)?;
    let merged = match driver {
        DriverWeight::Jump { intensity, .. } => {
            let lam = intensity.clipped(horizon)?;
            merge_breakpoints(&[tensor.breakpoints(), c.breakpoints(), lam.breakpoints()])?
        }
        DriverWeight::Brownian => merge_breakpoints(&[tensor.breakpoints(), c.breakpoints()])?,
    };
    Ok(merged)
}

fn variance_rate_at(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &DriverWeight,
    time: f64,
) -> Result<SymMatrix, BoundsError> {
    let tv = tensor.value_at(time)?;
    let cv = c.value_at(time)?;
    match driver {
        DriverWeight::Jump { intensity, marks } => {
            let lam = intensity.value_at(time)?;
            let ej2 = marks.second_moment_matrix(cv.rows(), cv.cols());
            variance_rate_jump(tv, cv, lam, &ej2)
        }
        DriverWeight::Brownian => variance_rate_brownian(tv, cv),
    }
}

/// Integrated variance proxy on `[0, t]`: the exact sum of rate-times-length
/// over the constant pieces.
pub fn integrated_variance(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &DriverWeight,
    t: f64,
) -> Result<SymMatrix, BoundsError> {
    let merged = merged_coefficient_breakpoints(tensor, c, driver, t)?;
    let (m, n, _, _) = tensor.values()[0].dims();
    let mut acc = SymMatrix::zeros(m + n);
    for w in merged.windows(2) {
        let (start, end) = (w[0], w[1].min(t));
        if end <= start {
            break;
        }
        let rate = variance_rate_at(tensor, c, driver, start)?;
        acc.add_scaled_assign(&rate, end - start);
    }
    Ok(acc)
}

/// Variance proxy: the top eigenvalue of the integrated variance matrix.
/// For the block-diagonal matrices produced here this equals the larger of
/// the two block operator norms.
pub fn sigma_sq(v: &SymMatrix) -> f64 {
    v.lambda_max()
}

/// Uniform bound on the jump sizes of the integral up to `t`:
/// `jmax * sup_s ||C_s||_inf * max slice operator norm of T_s`.
/// Transposed slices share operator norms, so one slice scan suffices.
pub fn jump_bound(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    jmax: f64,
    t: f64,
) -> Result<f64, BoundsError> {
    let merged = merged_coefficient_breakpoints(tensor, c, &DriverWeight::Brownian, t)?;
    let mut best = 0.0f64;
    for w in merged.windows(2) {
        let (start, end) = (w[0], w[1].min(t));
        if end <= start {
            break;
        }
        let piece =
            c.value_at(start)?.max_abs_entry() * tensor.value_at(start)?.max_slice_op_norm();
        best = best.max(piece);
    }
    Ok(jmax * best)
}

/// Second-order remainder of the exponential: `e^x - 1 - x`, nonnegative
/// for every real `x`.
pub fn exp_remainder(x: f64) -> f64 {
    x.exp_m1() - x
}

/// `exp_remainder(xi * factor) / factor^2`, continued by its limit
/// `xi^2 / 2` at `factor == 0`.
pub fn exp_remainder_factor(xi: f64, factor: f64) -> f64 {
    if factor == 0.0 {
        xi * xi / 2.0
    } else {
        exp_remainder(xi * factor) / (factor * factor)
    }
}

/// Exponential-moment integral controlling the jump compensator:
/// `int_0^t exp_remainder(xi * f_s) / f_s^2 * W_s ds` with
/// `f_s = jmax ||C_s||_inf * max slice norm of T_s`. Under deterministic
/// bounded coefficients this is always finite; it is reported for
/// diagnostics and consumed by the compensator domination check. Brownian
/// drivers take `f_s = 0`, reducing the coefficient to `xi^2 / 2`.
pub fn integrability_integral(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &DriverWeight,
    t: f64,
    xi: f64,
) -> Result<SymMatrix, BoundsError> {
    let merged = merged_coefficient_breakpoints(tensor, c, driver, t)?;
    let (m, n, _, _) = tensor.values()[0].dims();
    let jmax = match driver {
        DriverWeight::Jump { marks, .. } => marks.max_abs(),
        DriverWeight::Brownian => 0.0,
    };
    let mut acc = SymMatrix::zeros(m + n);
    for w in merged.windows(2) {
        let (start, end) = (w[0], w[1].min(t));
        if end <= start {
            break;
        }
        let factor = match driver {
            DriverWeight::Jump { .. } => {
                jmax * c.value_at(start)?.max_abs_entry()
                    * tensor.value_at(start)?.max_slice_op_norm()
            }
            DriverWeight::Brownian => 0.0,
        };
        let rate = variance_rate_at(tensor, c, driver, start)?;
        acc.add_scaled_assign(&rate, exp_remainder_factor(xi, factor) * (end - start));
    }
    Ok(acc)
}

/// Inputs of a tail threshold: confidence exponent, variance cap, jump cap
/// and martingale dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub x: f64,
    pub v: f64,
    pub b: f64,
    pub dims: (usize, usize),
}

/// Freedman-type threshold with the dimensional log folded in:
/// `sqrt(2 v (x + log(m + n))) + b (x + log(m + n)) / 3`.
pub fn freedman_threshold(q: &BoundQuery) -> f64 {
    let l = q.x + ((q.dims.0 + q.dims.1) as f64).ln();
    (2.0 * q.v * l).sqrt() + q.b * l / 3.0
}

/// Tail statement variants. The dimensional factor can either be folded into
/// the threshold (cap `e^-x`) or left on the probability side as
/// `(m + n) e^-x` with the bare-`x` threshold; the sub-Gaussian folded form
/// drops the factor two under the square root and requires `b = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdForm {
    FreedmanFolded,
    FreedmanBare,
    GaussianFolded,
}

impl ThresholdForm {
    pub fn threshold(&self, q: &BoundQuery) -> f64 {
        let d = (q.dims.0 + q.dims.1) as f64;
        match self {
            ThresholdForm::FreedmanFolded => freedman_threshold(q),
            ThresholdForm::FreedmanBare => (2.0 * q.v * q.x).sqrt() + q.b * q.x / 3.0,
            ThresholdForm::GaussianFolded => {
                debug_assert_eq!(q.b, 0.0, "sub-Gaussian form needs b = 0");
                (q.v * (q.x + d.ln())).sqrt()
            }
        }
    }

    /// Probability cap the exceedance is tested against.
    pub fn cap(&self, x: f64, dims: (usize, usize)) -> f64 {
        match self {
            ThresholdForm::FreedmanFolded | ThresholdForm::GaussianFolded => (-x).exp(),
            ThresholdForm::FreedmanBare => ((dims.0 + dims.1) as f64) * (-x).exp(),
        }
    }
}

/// Bound on the expected operator norm for deterministic coefficients:
/// `sigma sqrt(2 log(m + n)) + b log(m + n) / 3`.
pub fn expected_norm_bound(sigma: f64, b: f64, m: usize, n: usize) -> f64 {
    let l = ((m + n) as f64).ln();
    sigma * (2.0 * l).sqrt() + b * l / 3.0
}

/// Discrete-series variance term `max(||sum E S S^T||, ||sum E S^T S||)`
/// from the per-summand covariance pairs.
pub fn tropp_variance(pairs: &[(SymMatrix, SymMatrix)]) -> Result<f64, BoundsError> {
    let mut left = pairs[0].0.scale(0.0);
    let mut right = pairs[0].1.scale(0.0);
    for (l, r) in pairs {
        left = left.add(l)?;
        right = right.add(r)?;
    }
    Ok(left.operator_norm().max(right.operator_norm()))
}

/// The weaker norms-of-summands variant
/// `max(sum ||E S S^T||, sum ||E S^T S||)`; never smaller than
/// [`tropp_variance`] by the triangle inequality.
pub fn ahlswede_winter_variance(pairs: &[(SymMatrix, SymMatrix)]) -> Result<f64, BoundsError> {
    let left: f64 = pairs.iter().map(|(l, _)| l.operator_norm()).sum();
    let right: f64 = pairs.iter().map(|(_, r)| r.operator_norm()).sum();
    Ok(left.max(right))
}

#[cfg(test)]
mod tests;
