//! Positive-semidefinite domination of the jump compensator of the
//! exponential remainder process.
//!
//! The compensator of `sum_s (exp(xi dS(Z)) - xi dS(Z) - I)` expands into a
//! power series over driver entries: the term of order `j >= 2` at entry
//! `(a, b)` is `xi^j / j! * S(T[.,.;a,b])^j * C[a,b]^j * E[J^j] *
//! lambda[a,b]`. Truncating at order `K` and integrating piece by piece is
//! exact up to an analytic tail estimate, and the result must stay below
//! the exponential-moment integral in the psd order.

use serde::{Deserialize, Serialize};

use crate::bounds::integrability_integral;
use crate::linalg::{dilation, SymMatrix};
use crate::piecewise::merge_breakpoints;
use crate::scenario::{CompiledDriver, CompiledScenario};

use super::{CheckError, Verdict};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompensatorCheck {
    pub scenario: String,
    pub xi: f64,
    pub truncation: u32,
    /// Exactly integrated series truncation of the compensator.
    pub truncated: SymMatrix,
    /// Exponential-moment integral it must stay below in the psd order.
    pub bound: SymMatrix,
    /// Smallest eigenvalue of `bound - truncated compensator`.
    pub min_gap_eigenvalue: f64,
    /// Base psd tolerance, scaled by the bound's norm.
    pub tolerance: f64,
    /// Analytic cap on the psd norm of the dropped series tail.
    pub tail_estimate: f64,
    pub verdict: Verdict,
}

/// Sums `y^j / j!` for `j > truncation`, bounded by
/// `y^(K+1) / (K+1)! * e^y`.
fn series_tail_bound(y: f64, truncation: u32) -> f64 {
    let mut leading = 1.0;
    for j in 1..=(truncation + 1) {
        leading *= y / j as f64;
    }
    leading * y.exp()
}

/// Builds the exactly integrated series truncation and verifies the psd
/// domination within tolerance plus the truncation tail.
pub fn check_domination(
    scenario: &CompiledScenario,
    xi: f64,
    truncation: u32,
    base_tolerance: f64,
) -> Result<CompensatorCheck, CheckError> {
    let (intensity, marks) = match &scenario.driver {
        CompiledDriver::Jump { intensity, marks } => (intensity, marks),
        CompiledDriver::Brownian { .. } => return Err(CheckError::WrongDriver("jump")),
    };
    if truncation < 2 {
        return Err(CheckError::TruncationTooSmall(truncation));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(CheckError::XiOutOfRange {
            xi,
            range: "(0, inf)",
        });
    }
    let (m, n) = scenario.out_dims();
    let (p, q) = (scenario.dims.p, scenario.dims.q);
    let horizon = scenario.horizon;
    let jmax = marks.max_abs();
    let moments: Vec<f64> = (0..=truncation).map(|j| marks.moment(j)).collect();

    let tensor_clipped = scenario.tensor.clipped(horizon)?;
    let c_clipped = scenario.c.clipped(horizon)?;
    let lam_clipped = intensity.pieces().clipped(horizon)?;
    let merged = merge_breakpoints(&[
        tensor_clipped.breakpoints(),
        c_clipped.breakpoints(),
        lam_clipped.breakpoints(),
    ])?;

    let mut truncated = SymMatrix::zeros(m + n);
    let mut tail_estimate = 0.0;
    for w in merged.windows(2) {
        let dt = w[1] - w[0];
        let tensor = scenario.tensor.value_at(w[0])?;
        let c = scenario.c.value_at(w[0])?;
        let lam = intensity
            .pieces()
            .value_at(w[0])
            ?;

        let mut lam_total = 0.0;
        for a in 0..p {
            for b in 0..q {
                let rate = lam.get(a, b);
                lam_total += rate;
                if rate == 0.0 {
                    continue;
                }
                let scale = xi * c.get(a, b);
                // one eigendecomposition per slice serves every power
                let eig = dilation(&tensor.slice(a, b)).eigen()?;
                let series = eig.assemble(|mu| {
                    let y = scale * mu;
                    let mut term = y * y / 2.0;
                    let mut acc = term * moments[2];
                    for j in 3..=truncation {
                        term *= y / j as f64;
                        acc += term * moments[j as usize];
                    }
                    acc
                });
                truncated.add_scaled_assign(&series, rate * dt);
            }
        }

        let factor = jmax * c.max_abs_entry() * tensor.max_slice_op_norm();
        tail_estimate += lam_total * dt * series_tail_bound(xi * factor, truncation);
    }

    let bound = integrability_integral(
        &scenario.tensor,
        &scenario.c,
        &scenario.driver_weight(),
        horizon,
        xi,
    )?;
    let gap = bound.sub(&truncated)?;
    let min_gap_eigenvalue = gap.lambda_min();
    let tolerance = base_tolerance * bound.frobenius_norm().max(1.0);
    Ok(CompensatorCheck {
        scenario: scenario.name.clone(),
        xi,
        truncation,
        truncated,
        bound,
        min_gap_eigenvalue,
        tolerance,
        tail_estimate,
        verdict: Verdict::from_bool(min_gap_eigenvalue >= -(tolerance + tail_estimate)),
    })
}
