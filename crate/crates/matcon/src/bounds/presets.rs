//! Closed-form scenario presets. Each carries the specialized variance and
//! jump-bound formulas of a worked setting plus the tail statement the
//! setting comes with; all of them must agree with the general tensor
//! pipeline on the same scenario, which the test suite enforces.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::piecewise::PiecewiseProcess;
use crate::sim::IntensitySpec;

use super::{BoundQuery, BoundsError, ThresholdForm};

/// Names accepted on the command line and in configs.
pub const PRESET_NAMES: [&str; 5] = [
    "counting_matrix",
    "scalar_point_process",
    "static_gaussian",
    "static_poisson",
    "tropp_continuous",
];

/// The five worked settings with closed-form bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Preset {
    /// Compensated matrix counting process `int C (Hadamard) d(N - Lambda)`.
    CountingMatrix {
        c: PiecewiseProcess<Matrix>,
        intensity: IntensitySpec,
    },
    /// Scalar sum of compensated counting integrals
    /// `sum_k int w_k d(N_k - lambda_k)` with `sup |w| <= 1`.
    ScalarPointProcess {
        /// `1 x K` row of integrand weights per piece.
        weights: PiecewiseProcess<Matrix>,
        /// `K x 1` column of intensities.
        intensity: IntensitySpec,
    },
    /// Fixed matrix of independent centered Gaussians with standard
    /// deviations `c[i, j]` (unit horizon).
    StaticGaussian { c: Matrix },
    /// Fixed matrix of independent Poisson entries with means `lam[i, j]`,
    /// centered (unit horizon).
    StaticPoisson { lam: Matrix },
    /// Matrix integrand against a scalar Brownian driver,
    /// `int A_s dM_s`.
    TroppContinuous { integrand: PiecewiseProcess<Matrix> },
}

/// Specialized bound values together with the preset's tail statement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormBound {
    pub dims: (usize, usize),
    pub sigma_sq: f64,
    pub jump_bound: f64,
    pub form: ThresholdForm,
    /// Linear coefficient plugged into the threshold. The scalar
    /// point-process statement fixes it at one rather than at the actual
    /// jump bound.
    pub threshold_b: f64,
}

impl ClosedFormBound {
    pub fn threshold(&self, x: f64) -> f64 {
        self.form.threshold(&BoundQuery {
            x,
            v: self.sigma_sq,
            b: self.threshold_b,
            dims: self.dims,
        })
    }

    pub fn cap(&self, x: f64) -> f64 {
        self.form.cap(x, self.dims)
    }
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::CountingMatrix { .. } => "counting_matrix",
            Preset::ScalarPointProcess { .. } => "scalar_point_process",
            Preset::StaticGaussian { .. } => "static_gaussian",
            Preset::StaticPoisson { .. } => "static_poisson",
            Preset::TroppContinuous { .. } => "tropp_continuous",
        }
    }

    /// Horizon the preset's statement refers to; the static settings are
    /// pinned to one time unit.
    pub fn horizon(&self) -> f64 {
        match self {
            Preset::CountingMatrix { c, .. } => c.horizon(),
            Preset::ScalarPointProcess { weights, .. } => weights.horizon(),
            Preset::StaticGaussian { .. } | Preset::StaticPoisson { .. } => 1.0,
            Preset::TroppContinuous { integrand } => integrand.horizon(),
        }
    }

    /// The specialized variance, jump bound and threshold at the preset's
    /// horizon.
    pub fn closed_form(&self) -> Result<ClosedFormBound, BoundsError> {
        match self {
            Preset::CountingMatrix { c, intensity } => {
                let t = self.horizon();
                let (p, q) = intensity.dims();
                let mut integral = Matrix::zeros(p, q);
                let lam = intensity.pieces();
                let merged = crate::piecewise::merge_breakpoints(&[
                    c.clipped(t)?.breakpoints(),
                    lam.clipped(t)?.breakpoints(),
                ])?;
                for w in merged.windows(2) {
                    let rate = c.value_at(w[0])?.hadamard_pow(2).hadamard(lam.value_at(w[0])?)?;
                    integral.add_scaled_assign(&rate, w[1] - w[0]);
                }
                let sigma_sq = integral
                    .max_row_lp_norm(1)?
                    .max(integral.max_col_lp_norm(1)?);
                let b = c
                    .pieces_until(t)?
                    .iter()
                    .map(|(_, _, v)| v.max_abs_entry())
                    .fold(0.0f64, f64::max);
                Ok(ClosedFormBound {
                    dims: (p, q),
                    sigma_sq,
                    jump_bound: b,
                    form: ThresholdForm::FreedmanFolded,
                    threshold_b: b,
                })
            }
            Preset::ScalarPointProcess { weights, intensity } => {
                let t = self.horizon();
                let k_components = weights.values()[0].cols();
                let merged = crate::piecewise::merge_breakpoints(&[
                    weights.clipped(t)?.breakpoints(),
                    intensity.pieces().clipped(t)?.breakpoints(),
                ])?;
                let mut v = 0.0;
                for w in merged.windows(2) {
                    let a = weights.value_at(w[0])?;
                    let lam = intensity.pieces().value_at(w[0])?;
                    let rate: f64 = (0..k_components)
                        .map(|k| a.get(0, k) * a.get(0, k) * lam.get(k, 0))
                        .sum();
                    v += rate * (w[1] - w[0]);
                }
                let sup = weights
                    .pieces_until(t)?
                    .iter()
                    .map(|(_, _, a)| a.max_abs_entry())
                    .fold(0.0f64, f64::max);
                if sup > 1.0 {
                    return Err(BoundsError::WeightBoundExceeded(sup));
                }
                Ok(ClosedFormBound {
                    dims: (1, 1),
                    sigma_sq: v,
                    jump_bound: sup,
                    form: ThresholdForm::FreedmanBare,
                    threshold_b: 1.0,
                })
            }
            Preset::StaticGaussian { c } => {
                let sq = c.hadamard_pow(2);
                let sigma_sq = sq.max_row_lp_norm(1)?.max(sq.max_col_lp_norm(1)?);
                Ok(ClosedFormBound {
                    dims: c.shape(),
                    sigma_sq,
                    jump_bound: 0.0,
                    form: ThresholdForm::GaussianFolded,
                    threshold_b: 0.0,
                })
            }
            Preset::StaticPoisson { lam } => {
                let sigma_sq = lam.max_row_lp_norm(1)?.max(lam.max_col_lp_norm(1)?);
                Ok(ClosedFormBound {
                    dims: lam.shape(),
                    sigma_sq,
                    jump_bound: 1.0,
                    form: ThresholdForm::FreedmanBare,
                    threshold_b: 1.0,
                })
            }
            Preset::TroppContinuous { integrand } => {
                let t = self.horizon();
                let (m, n) = integrand.values()[0].shape();
                let mut left = crate::linalg::SymMatrix::zeros(m);
                let mut right = crate::linalg::SymMatrix::zeros(n);
                for (start, end, a) in integrand.pieces_until(t)? {
                    left.add_scaled_assign(&a.gram_left(), end - start);
                    right.add_scaled_assign(&a.gram_right(), end - start);
                }
                let sigma_sq = left.operator_norm().max(right.operator_norm());
                Ok(ClosedFormBound {
                    dims: (m, n),
                    sigma_sq,
                    jump_bound: 0.0,
                    form: ThresholdForm::FreedmanBare,
                    threshold_b: 0.0,
                })
            }
        }
    }
}
