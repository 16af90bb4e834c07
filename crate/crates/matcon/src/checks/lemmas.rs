//! Numeric checks of the supporting matrix inequalities: the deviation
//! bound through the trace exponential, psd domination of odd dilation
//! powers, and the trace-exponential product inequality.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dilation, psd_fractional_power, sym_exp, trace_exp, Matrix, SymMatrix};
use crate::rng::substream;

use super::{clopper_pearson_upper, mean_and_se, CheckError, Verdict};

/// Multiplicative slack applied to the estimated deviation cap, since both
/// sides of the comparison carry Monte Carlo noise.
const DEVIATION_SLACK: f64 = 0.10;

/// Pair generators for the deviation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationPairKind {
    /// `X = Y` deterministic: zero exceedances, cap equals the dimension.
    IdenticalDeterministic,
    /// `X = Y + diag(g)` with standard Gaussian `g`, `Y` a fixed symmetric
    /// matrix.
    DiagonalGaussianShift,
    /// `Y = 0`, `X` symmetric with independent standard Gaussian entries.
    WignerAgainstZero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub x: f64,
    pub exceed_count: u64,
    pub upper_cl: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationCheck {
    pub kind: DeviationPairKind,
    pub dim: usize,
    pub trials: u64,
    pub master_seed: u64,
    /// Monte Carlo estimate of `E tr exp(X - Y)` and its upper limit.
    pub k_hat: f64,
    pub k_upper: f64,
    pub rows: Vec<DeviationRow>,
    pub verdict: Verdict,
}

fn sample_pair(kind: DeviationPairKind, dim: usize, rng: &mut impl Rng) -> (SymMatrix, SymMatrix) {
    match kind {
        DeviationPairKind::IdenticalDeterministic => {
            let fixed = SymMatrix::from_fn_lower(dim, |i, j| ((i + 2 * j) as f64) / dim as f64);
            (fixed.clone(), fixed)
        }
        DeviationPairKind::DiagonalGaussianShift => {
            let base = SymMatrix::from_fn_lower(dim, |i, j| ((i * dim + j) as f64 * 0.1).sin());
            let mut shift = base.clone();
            for i in 0..dim {
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                let bump = SymMatrix::from_fn_lower(dim, |a, b| {
                    if a == i && b == i {
                        g
                    } else {
                        0.0
                    }
                });
                shift = shift.add(&bump).unwrap();
            }
            (shift, base)
        }
        DeviationPairKind::WignerAgainstZero => {
            let x = SymMatrix::from_fn_lower(dim, |_, _| rng.sample(rand_distr::StandardNormal));
            (x, SymMatrix::zeros(dim))
        }
    }
}

/// Checks that exceedance probabilities of `lambda_max(X) - lambda_max(Y)`
/// stay below `E tr exp(X - Y) * e^-x`, with both sides estimated from the
/// same sample and a fixed multiplicative slack.
pub fn check_deviation_bound(
    kind: DeviationPairKind,
    dim: usize,
    x_values: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<DeviationCheck, CheckError> {
    if trials == 0 {
        return Err(CheckError::NoReplicates);
    }
    let mut traces = Vec::with_capacity(trials as usize);
    let mut gaps = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let mut rng = substream(master_seed, &[101, kind as u64, trial]);
        let (x, y) = sample_pair(kind, dim, &mut rng);
        let diff = x.sub(&y)?;
        traces.push(trace_exp(&diff).value());
        gaps.push(x.lambda_max() - y.lambda_max());
    }
    let (k_hat, k_se) = mean_and_se(&traces);
    let k_upper = k_hat + 3.0 * k_se;

    let rows: Vec<DeviationRow> = x_values
        .iter()
        .map(|&x| {
            let exceed_count = gaps.iter().filter(|&&g| g >= x).count() as u64;
            let upper_cl = clopper_pearson_upper(exceed_count, trials, super::tail::CONFIDENCE);
            let bound = (k_upper * (-x).exp() * (1.0 + DEVIATION_SLACK)).min(1.0);
            DeviationRow {
                x,
                exceed_count,
                upper_cl,
                bound,
                verdict: Verdict::from_bool(upper_cl <= bound),
            }
        })
        .collect();
    let verdict = Verdict::from_bool(rows.iter().all(|r| r.verdict.passed()));
    Ok(DeviationCheck {
        kind,
        dim,
        trials,
        master_seed,
        k_hat,
        k_upper,
        rows,
        verdict,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OddPowerCheck {
    pub trials: u64,
    pub dims: (usize, usize),
    pub powers: Vec<u32>,
    pub master_seed: u64,
    pub failures: u64,
    /// Most negative scaled eigenvalue of the domination gap seen.
    pub worst_margin: f64,
    pub verdict: Verdict,
}

/// For random `X`, `S(X)^(2k+1)` must be dominated in the psd order by
/// `blockdiag((X X^T)^(k + 1/2), (X^T X)^(k + 1/2))`, within
/// `1e-8 * ||X||^(2k+1)`.
pub fn check_odd_dilation_powers(
    trials: u64,
    dims: (usize, usize),
    powers: &[u32],
    master_seed: u64,
) -> Result<OddPowerCheck, CheckError> {
    let mut failures = 0;
    let mut worst_margin = f64::INFINITY;
    for trial in 0..trials {
        let mut rng = substream(master_seed, &[102, trial]);
        let x = Matrix::from_fn(dims.0, dims.1, |_, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal)
        });
        let eig = dilation(&x).eigen()?;
        let norm = x.operator_norm();
        for &k in powers {
            let odd = eig.assemble(|v| v.powi(2 * k as i32 + 1));
            let top = psd_fractional_power(&x.gram_left(), k as f64 + 0.5)?;
            let bottom = psd_fractional_power(&x.gram_right(), k as f64 + 0.5)?;
            let rhs = SymMatrix::block_diagonal(&top, &bottom);
            let tol = 1e-8 * norm.powi(2 * k as i32 + 1);
            let margin = rhs.sub(&odd)?.lambda_min() + tol;
            worst_margin = worst_margin.min(margin);
            if margin < 0.0 {
                failures += 1;
            }
        }
    }
    Ok(OddPowerCheck {
        trials,
        dims,
        powers: powers.to_vec(),
        master_seed,
        failures,
        worst_margin,
        verdict: Verdict::from_bool(failures == 0),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenThompsonCheck {
    pub trials: u64,
    pub dim: usize,
    pub master_seed: u64,
    /// Largest relative excess of `tr exp(A + B)` over `tr(exp A exp B)`.
    pub worst_excess: f64,
    pub verdict: Verdict,
}

/// `tr exp(A + B) <= tr(exp(A) exp(B))` for random symmetric pairs, up to
/// relative roundoff slack.
pub fn check_golden_thompson(
    trials: u64,
    dim: usize,
    master_seed: u64,
) -> Result<GoldenThompsonCheck, CheckError> {
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..trials {
        let mut rng = substream(master_seed, &[103, trial]);
        let a = SymMatrix::from_fn_lower(dim, |_, _| rng.gen_range(-1.0..1.0));
        let b = SymMatrix::from_fn_lower(dim, |_, _| rng.gen_range(-1.0..1.0));
        let lhs = trace_exp(&a.add(&b)?).value();
        let rhs = sym_exp(&a)?
            .as_matrix()
            .matmul(&sym_exp(&b)?.as_matrix())?
            .trace();
        worst = worst.max((lhs - rhs) / rhs.abs().max(1.0));
    }
    Ok(GoldenThompsonCheck {
        trials,
        dim,
        master_seed,
        worst_excess: worst,
        verdict: Verdict::from_bool(worst <= 1e-9),
    })
}
