//! Machine-readable result artifacts. Every report embeds the scenario
//! snapshot, master seed and toolkit version, so rerunning it needs nothing
//! beyond the file itself.

use serde::{Deserialize, Serialize};

use crate::bounds::presets::ClosedFormBound;
use crate::checks::{
    CompensatorCheck, DeviationCheck, GoldenThompsonCheck, MeanNormCheck, OddPowerCheck,
    SupermartingaleCheck, TailExperiment, VarianceConsistencyCheck, Verdict,
};
use crate::scenario::{ScenarioConfig, VarianceReport};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Agreement between a preset's closed-form values and the general
/// pipeline on the same scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresetConsistency {
    pub preset: String,
    pub closed_form: ClosedFormBound,
    pub pipeline_sigma_sq: f64,
    pub pipeline_jump_bound: f64,
    pub max_relative_deviation: f64,
    pub verdict: Verdict,
}

impl PresetConsistency {
    pub fn compare(name: &str, closed: ClosedFormBound, report: &VarianceReport) -> Self {
        let dev_sigma =
            (closed.sigma_sq - report.sigma_sq).abs() / report.sigma_sq.abs().max(1.0);
        let dev_b =
            (closed.jump_bound - report.jump_bound).abs() / report.jump_bound.abs().max(1.0);
        let max_relative_deviation = dev_sigma.max(dev_b);
        PresetConsistency {
            preset: name.to_string(),
            closed_form: closed,
            pipeline_sigma_sq: report.sigma_sq,
            pipeline_jump_bound: report.jump_bound,
            max_relative_deviation,
            verdict: Verdict::from_bool(max_relative_deviation <= 1e-10),
        }
    }
}

/// Results of the deterministic matrix-inequality suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaSuite {
    pub deviation: Vec<DeviationCheck>,
    pub odd_power: OddPowerCheck,
    pub golden_thompson: GoldenThompsonCheck,
    pub verdict: Verdict,
}

impl LemmaSuite {
    pub fn collect(
        deviation: Vec<DeviationCheck>,
        odd_power: OddPowerCheck,
        golden_thompson: GoldenThompsonCheck,
    ) -> Self {
        let verdict = Verdict::from_bool(
            deviation.iter().all(|d| d.verdict.passed())
                && odd_power.verdict.passed()
                && golden_thompson.verdict.passed(),
        );
        LemmaSuite {
            deviation,
            odd_power,
            golden_thompson,
            verdict,
        }
    }

    /// Fixed-order CSV: `check,param,statistic,bound,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,param,statistic,bound,verdict\n");
        for dev in &self.deviation {
            for row in &dev.rows {
                out.push_str(&format!(
                    "deviation_{:?},x={},{},{},{}\n",
                    dev.kind, row.x, row.upper_cl, row.bound, row.verdict
                ));
            }
        }
        out.push_str(&format!(
            "odd_power,worst_margin,{},0,{}\n",
            self.odd_power.worst_margin, self.odd_power.verdict
        ));
        out.push_str(&format!(
            "golden_thompson,worst_excess,{},1e-9,{}\n",
            self.golden_thompson.worst_excess, self.golden_thompson.verdict
        ));
        out
    }
}

/// Aggregate of every artifact produced for one scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub scenario: String,
    pub toolkit_version: String,
    pub master_seed: u64,
    pub runtime_seconds: f64,
    pub config: ScenarioConfig,
    pub variance: VarianceReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_consistency: Option<PresetConsistency>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailExperiment>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub supermartingale: Vec<SupermartingaleCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensator: Option<CompensatorCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance_consistency: Option<VarianceConsistencyCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_norm: Option<MeanNormCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmaSuite>,
    pub verdict: Verdict,
}

impl BoundReport {
    /// Recomputes the aggregate verdict from every embedded check.
    pub fn finalize_verdict(&mut self) {
        let mut ok = true;
        if let Some(p) = &self.preset_consistency {
            ok &= p.verdict.passed();
        }
        if let Some(t) = &self.tail {
            ok &= t.verdict.passed();
        }
        ok &= self.supermartingale.iter().all(|s| s.verdict.passed());
        if let Some(c) = &self.compensator {
            ok &= c.verdict.passed();
        }
        if let Some(v) = &self.variance_consistency {
            ok &= v.verdict.passed();
        }
        if let Some(m) = &self.mean_norm {
            ok &= m.verdict.passed();
        }
        if let Some(l) = &self.lemmas {
            ok &= l.verdict.passed();
        }
        self.verdict = Verdict::from_bool(ok);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
