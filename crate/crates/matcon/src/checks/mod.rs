//! Monte Carlo and deterministic verification of every inequality the bound
//! pipeline asserts: tail experiments, supermartingale displays, the
//! deviation bound, odd dilation powers, the trace-exponential product
//! inequality, compensator domination and variance consistency.
//!
//! Every check is deterministic given (scenario, seed): replicates draw
//! from counter-derived substreams and are reduced in replicate order, so
//! thread count can never flip a verdict.

mod binomial;
mod compensator;
mod consistency;
mod lemmas;
mod supermartingale;
mod tail;


pub use binomial::clopper_pearson_upper;
pub use compensator::{check_domination, CompensatorCheck};
pub use consistency::{
    check_mean_norm, check_variance, MeanNormCheck, VarianceConsistencyCheck,
};
pub use lemmas::{
    check_deviation_bound, check_golden_thompson, check_odd_dilation_powers, DeviationCheck,
    DeviationPairKind, DeviationRow, GoldenThompsonCheck, OddPowerCheck,
};
pub use supermartingale::{check_supermartingale, SupermartingaleCheck, SupermartingaleKind};
pub use tail::{run_tail_experiment, TailExperiment, TailRow};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundsError;
use crate::linalg::LinalgError;
use crate::scenario::ScenarioError;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("this check needs a {0} driver")]
    WrongDriver(&'static str),
    #[error("xi = {xi} outside the valid range {range}")]
    XiOutOfRange { xi: f64, range: &'static str },
    #[error("jump bound is zero, the scaled supermartingale is undefined")]
    ZeroJumpBound,
    #[error("trace exponential overflowed, xi too large for this scenario")]
    XiTooLarge,
    #[error("series truncation must be at least 2, got {0}")]
    TruncationTooSmall(u32),
    #[error("need at least one replicate")]
    NoReplicates,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Piecewise(#[from] crate::piecewise::PiecewiseError),
}

/// PASS/FAIL outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// Compensated summation; replicate values are always reduced in index
/// order so results do not depend on the thread count.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Mean and standard error of a replicate-indexed sample, reduced in order.
pub(crate) fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mut sum = KahanSum::default();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut sq = KahanSum::default();
    for &v in values {
        sq.add((v - mean) * (v - mean));
    }
    let var = sq.value() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Maps replicate indices to values in parallel, preserving index order.
pub(crate) fn replicate_map<T, E, F>(replicates: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    (0..replicates)
        .into_par_iter()
        .map(f)
        .collect::<Result<Vec<_>, E>>()
}
