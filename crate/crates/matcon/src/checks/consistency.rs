//! Monte Carlo consistency of realized quadratic covariations, moment
//! matrices and the expected-norm bound against the analytic pipeline.

use serde::{Deserialize, Serialize};

use crate::bounds::expected_norm_bound;
use crate::linalg::{dilation, Matrix};
use crate::scenario::CompiledScenario;

use super::{mean_and_se, replicate_map, CheckError, Verdict};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceConsistencyCheck {
    pub scenario: String,
    pub replicates: u64,
    pub master_seed: u64,
    /// Worst entry deviation of the mean realized covariation from the
    /// analytic block, in standard-error units.
    pub worst_covariation_sigmas: f64,
    /// `max(||mean Z Z^T||, ||mean Z^T Z||)` against the variance proxy.
    pub moment_norm: f64,
    pub sigma_sq: f64,
    pub moment_tolerance: f64,
    pub verdict: Verdict,
}

/// Per-entry means and standard errors of a replicate-indexed matrix sample.
fn matrix_mean_se(samples: &[Matrix]) -> (Matrix, Matrix) {
    let (rows, cols) = samples[0].shape();
    let mut mean = Matrix::zeros(rows, cols);
    let mut se = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let entries: Vec<f64> = samples.iter().map(|s| s.get(i, j)).collect();
            let (mu, s) = mean_and_se(&entries);
            mean.set(i, j, mu);
            se.set(i, j, s);
        }
    }
    (mean, se)
}

/// Entry deviations in standard-error units; exact entries (zero spread)
/// must agree to roundoff.
fn worst_sigmas(mean: &Matrix, se: &Matrix, target: &Matrix, scale: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..mean.rows() {
        for j in 0..mean.cols() {
            let err = (mean.get(i, j) - target.get(i, j)).abs();
            let s = se.get(i, j);
            if s == 0.0 {
                if err > 1e-12 * scale.max(1.0) {
                    worst = worst.max(f64::INFINITY);
                }
            } else {
                worst = worst.max(err / s);
            }
        }
    }
    worst
}

/// Checks that the Monte Carlo mean of the realized column and row
/// covariations reproduces the analytic variance blocks entry-wise within
/// three standard errors, and that the empirical second-moment matrices
/// reproduce the variance proxy.
pub fn check_variance(
    scenario: &CompiledScenario,
    replicates: u64,
    master_seed: u64,
) -> Result<VarianceConsistencyCheck, CheckError> {
    if replicates == 0 {
        return Err(CheckError::NoReplicates);
    }
    let report = scenario.variance_report()?;
    let (m, _n) = scenario.out_dims();
    let analytic_col = report.integrated_variance.leading_block(m).as_matrix();
    let analytic_row = report.integrated_variance.trailing_block(m).as_matrix();

    let samples: Vec<(Matrix, Matrix, Matrix, Matrix)> = replicate_map(replicates, |rep| {
        let path = scenario.simulate(master_seed, rep)?;
        let (col, row) = path.realized_covariations();
        let z = path.terminal_value();
        Ok::<_, CheckError>((
            col.as_matrix(),
            row.as_matrix(),
            z.gram_left().as_matrix(),
            z.gram_right().as_matrix(),
        ))
    })?;

    let cols: Vec<Matrix> = samples.iter().map(|s| s.0.clone()).collect();
    let rows: Vec<Matrix> = samples.iter().map(|s| s.1.clone()).collect();
    let (col_mean, col_se) = matrix_mean_se(&cols);
    let (row_mean, row_se) = matrix_mean_se(&rows);
    let scale = report.sigma_sq;
    let worst = worst_sigmas(&col_mean, &col_se, &analytic_col, scale)
        .max(worst_sigmas(&row_mean, &row_se, &analytic_row, scale));

    let left: Vec<Matrix> = samples.iter().map(|s| s.2.clone()).collect();
    let right: Vec<Matrix> = samples.iter().map(|s| s.3.clone()).collect();
    let (left_mean, left_se) = matrix_mean_se(&left);
    let (right_mean, right_se) = matrix_mean_se(&right);
    let moment_norm = left_mean.operator_norm().max(right_mean.operator_norm());
    // aggregate entry noise into one operator-norm tolerance
    let moment_tolerance = 3.0 * left_se.frobenius_norm().max(right_se.frobenius_norm());

    let verdict = Verdict::from_bool(
        worst <= 3.0 && (moment_norm - report.sigma_sq).abs() <= moment_tolerance,
    );
    Ok(VarianceConsistencyCheck {
        scenario: scenario.name.clone(),
        replicates,
        master_seed,
        worst_covariation_sigmas: worst,
        moment_norm,
        sigma_sq: report.sigma_sq,
        moment_tolerance,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanNormCheck {
    pub scenario: String,
    pub replicates: u64,
    pub master_seed: u64,
    pub mc_mean: f64,
    pub se: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

/// Monte Carlo mean of the operator norm against the closed-form bound for
/// deterministic coefficients.
pub fn check_mean_norm(
    scenario: &CompiledScenario,
    replicates: u64,
    master_seed: u64,
) -> Result<MeanNormCheck, CheckError> {
    if replicates == 0 {
        return Err(CheckError::NoReplicates);
    }
    let report = scenario.variance_report()?;
    let (m, n) = scenario.out_dims();
    let bound = expected_norm_bound(report.sigma_sq.sqrt(), report.jump_bound, m, n);
    let norms: Vec<f64> = replicate_map(replicates, |rep| {
        let path = scenario.simulate(master_seed, rep)?;
        Ok::<f64, CheckError>(dilation(path.terminal_value()).lambda_max())
    })?;
    let (mc_mean, se) = mean_and_se(&norms);
    Ok(MeanNormCheck {
        scenario: scenario.name.clone(),
        replicates,
        master_seed,
        mc_mean,
        se,
        bound,
        verdict: Verdict::from_bool(mc_mean <= bound + 3.0 * se),
    })
}
