//! Terminal-mean checks of the corrected trace-exponential supermartingale:
//! for a nonnegative supermartingale started at `m + n`, the empirical mean
//! of the terminal value must not exceed `m + n` beyond Monte Carlo noise.

use serde::{Deserialize, Serialize};

use crate::bounds::integrability_integral;
use crate::linalg::{dilation, trace_exp};
use crate::scenario::CompiledScenario;

use super::{mean_and_se, replicate_map, CheckError, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupermartingaleKind {
    Continuous,
    Jump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupermartingaleCheck {
    pub scenario: String,
    pub kind: SupermartingaleKind,
    pub xi: f64,
    pub replicates: u64,
    pub master_seed: u64,
    pub mean: f64,
    pub se: f64,
    /// Dimensional cap `m + n` the mean is compared against.
    pub cap: f64,
    pub verdict: Verdict,
}

/// Dispatches on the scenario's driver family.
pub fn check_supermartingale(
    scenario: &CompiledScenario,
    xi: f64,
    replicates: u64,
    master_seed: u64,
) -> Result<SupermartingaleCheck, CheckError> {
    if scenario.is_jump() {
        check_jump(scenario, xi, replicates, master_seed)
    } else {
        check_continuous(scenario, xi, replicates, master_seed)
    }
}

/// Brownian display: `E tr exp(xi S(Z_t) - xi^2/2 V_t) <= m + n`.
pub fn check_continuous(
    scenario: &CompiledScenario,
    xi: f64,
    replicates: u64,
    master_seed: u64,
) -> Result<SupermartingaleCheck, CheckError> {
    if scenario.is_jump() {
        return Err(CheckError::WrongDriver("Brownian"));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(CheckError::XiOutOfRange {
            xi,
            range: "[0, inf)",
        });
    }
    if replicates == 0 {
        return Err(CheckError::NoReplicates);
    }
    let report = scenario.variance_report()?;
    let penalty = report.integrated_variance.scale(xi * xi / 2.0);
    run(
        scenario,
        SupermartingaleKind::Continuous,
        xi,
        xi,
        &penalty,
        replicates,
        master_seed,
    )
}

/// Jump display with the jump-bound scaling: for `b` the scenario's jump
/// bound, `E tr exp((xi/b) S(Z_t) - int phi-rate W ds at xi/b) <= m + n`
/// for `xi` up to three.
pub fn check_jump(
    scenario: &CompiledScenario,
    xi: f64,
    replicates: u64,
    master_seed: u64,
) -> Result<SupermartingaleCheck, CheckError> {
    if !scenario.is_jump() {
        return Err(CheckError::WrongDriver("jump"));
    }
    if !(0.0..=3.0).contains(&xi) {
        return Err(CheckError::XiOutOfRange { xi, range: "[0, 3]" });
    }
    if replicates == 0 {
        return Err(CheckError::NoReplicates);
    }
    let report = scenario.variance_report()?;
    let b = report.jump_bound;
    if b == 0.0 {
        return Err(CheckError::ZeroJumpBound);
    }
    let penalty = integrability_integral(
        &scenario.tensor,
        &scenario.c,
        &scenario.driver_weight(),
        scenario.horizon,
        xi / b,
    )?;
    run(
        scenario,
        SupermartingaleKind::Jump,
        xi,
        xi / b,
        &penalty,
        replicates,
        master_seed,
    )
}

fn run(
    scenario: &CompiledScenario,
    kind: SupermartingaleKind,
    xi: f64,
    dilation_scale: f64,
    penalty: &crate::linalg::SymMatrix,
    replicates: u64,
    master_seed: u64,
) -> Result<SupermartingaleCheck, CheckError> {
    let (m, n) = scenario.out_dims();
    let values: Vec<f64> = replicate_map(replicates, |rep| {
        let path = scenario.simulate(master_seed, rep)?;
        let exponent = dilation(path.terminal_value())
            .scale(dilation_scale)
            .sub(penalty)?;
        let l = trace_exp(&exponent);
        if l.is_overflow() {
            return Err(CheckError::XiTooLarge);
        }
        debug_assert!(l.value() >= 0.0);
        Ok(l.value())
    })?;
    let (mean, se) = mean_and_se(&values);
    let cap = (m + n) as f64;
    Ok(SupermartingaleCheck {
        scenario: scenario.name.clone(),
        kind,
        xi,
        replicates,
        master_seed,
        mean,
        se,
        cap,
        verdict: Verdict::from_bool(mean <= cap + 3.0 * se),
    })
}
