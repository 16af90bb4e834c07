//! Experiment configuration: a scenario fully describes one martingale
//! construction (dimensions, coefficient processes, driver family, marks,
//! horizon) and compiles into a runnable form. Configs are plain JSON and
//! every validation failure names the offending field path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::presets::Preset;
use crate::bounds::{
    integrability_integral, integrated_variance, jump_bound, sigma_sq, BoundQuery, BoundsError,
    DriverWeight, ThresholdForm,
};
use crate::linalg::{Matrix, Rank4Tensor, SymMatrix};
use crate::martingale::{
    integrate_brownian, integrate_jump, matrix_integrand_tensor, sandwich_tensor, EngineError,
    MartingalePath,
};
use crate::piecewise::{merge_breakpoints, PiecewiseProcess};
use crate::rng::ReplicateStreams;
use crate::sim::{
    martingale_jump_stream, simulate_brownian, simulate_counting, IntensitySpec, JumpMarkSpec,
    SimError,
};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config error at {path}: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, reason: impl std::fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

fn default_cells() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriverConfig {
    /// Compensated marked counting process.
    Jump {
        intensity: PiecewiseProcess<Matrix>,
        marks: JumpMarkSpec,
    },
    /// Matrix of independent standard Brownian motions; the integration grid
    /// subdivides each constant coefficient piece into `cells_per_piece`
    /// equal cells (the law of the result is exact for any cell count).
    Brownian {
        #[serde(default = "default_cells")]
        cells_per_piece: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum CoefficientConfig {
    /// The rank-4 coefficient given directly, entries indexed `[i][j][k][l]`.
    Tensor {
        tensor: PiecewiseProcess<Rank4Tensor>,
    },
    /// Two-sided factor form `A_s X B_s`: `left` is `m x p`, `right` is
    /// `q x n`.
    Factored {
        left: PiecewiseProcess<Matrix>,
        right: PiecewiseProcess<Matrix>,
    },
    /// Matrix integrand against a scalar driver (`p = q = 1`).
    MatrixIntegrand { integrand: PiecewiseProcess<Matrix> },
}

/// Serializable description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub dims: Dims,
    pub horizon: f64,
    pub driver: DriverConfig,
    pub coefficients: CoefficientConfig,
    /// Entry-wise modulation `C_s` of the driver, `p x q` per piece.
    pub c: PiecewiseProcess<Matrix>,
    /// Optional closed-form preset this scenario instantiates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new("<json>", e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates every cross-field constraint and builds the runnable form.
    pub fn compile(&self) -> Result<CompiledScenario, ConfigError> {
        let Dims { m, n, p, q } = self.dims;
        if self.name.is_empty() {
            return Err(ConfigError::new("name", "must be nonempty"));
        }
        for (path, v) in [("dims.m", m), ("dims.n", n), ("dims.p", p), ("dims.q", q)] {
            if v == 0 {
                return Err(ConfigError::new(path, "must be at least 1"));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ConfigError::new("horizon", "must be positive and finite"));
        }

        let check_horizon = |path: &str, h: f64| {
            if h != self.horizon {
                Err(ConfigError::new(
                    path,
                    format!("horizon {h} must equal the scenario horizon {}", self.horizon),
                ))
            } else {
                Ok(())
            }
        };

        // the entry-wise coefficient must match the driver shape
        check_horizon("c.breakpoints", self.c.horizon())?;
        for (k, v) in self.c.values().iter().enumerate() {
            if v.shape() != (p, q) {
                return Err(ConfigError::new(
                    format!("c.values[{k}]"),
                    format!(
                        "shape {}x{} must match dims.p x dims.q = {p}x{q}",
                        v.rows(),
                        v.cols()
                    ),
                ));
            }
        }

        let tensor = match &self.coefficients {
            CoefficientConfig::Tensor { tensor } => {
                check_horizon("coefficients.tensor.breakpoints", tensor.horizon())?;
                for (k, v) in tensor.values().iter().enumerate() {
                    if v.dims() != (m, n, p, q) {
                        return Err(ConfigError::new(
                            format!("coefficients.tensor.values[{k}]"),
                            format!("dims {:?} must equal dims = ({m}, {n}, {p}, {q})", v.dims()),
                        ));
                    }
                }
                tensor.clone()
            }
            CoefficientConfig::Factored { left, right } => {
                check_horizon("coefficients.left.breakpoints", left.horizon())?;
                check_horizon("coefficients.right.breakpoints", right.horizon())?;
                for (k, v) in left.values().iter().enumerate() {
                    if v.shape() != (m, p) {
                        return Err(ConfigError::new(
                            format!("coefficients.left.values[{k}]"),
                            format!(
                                "shape {}x{} must be dims.m x dims.p = {m}x{p}",
                                v.rows(),
                                v.cols()
                            ),
                        ));
                    }
                }
                for (k, v) in right.values().iter().enumerate() {
                    if v.shape() != (q, n) {
                        return Err(ConfigError::new(
                            format!("coefficients.right.values[{k}]"),
                            format!(
                                "shape {}x{} must be dims.q x dims.n = {q}x{n}",
                                v.rows(),
                                v.cols()
                            ),
                        ));
                    }
                }
                sandwich_tensor(left, right)
                    .map_err(|e| ConfigError::new("coefficients", e))?
            }
            CoefficientConfig::MatrixIntegrand { integrand } => {
                if (p, q) != (1, 1) {
                    return Err(ConfigError::new(
                        "dims.p",
                        format!(
                            "matrix-integrand form needs a scalar driver (p = q = 1), got p={p}, q={q}"
                        ),
                    ));
                }
                check_horizon("coefficients.integrand.breakpoints", integrand.horizon())?;
                for (k, v) in integrand.values().iter().enumerate() {
                    if v.shape() != (m, n) {
                        return Err(ConfigError::new(
                            format!("coefficients.integrand.values[{k}]"),
                            format!(
                                "shape {}x{} must be dims.m x dims.n = {m}x{n}",
                                v.rows(),
                                v.cols()
                            ),
                        ));
                    }
                }
                matrix_integrand_tensor(integrand)
            }
        };

        let driver = match &self.driver {
            DriverConfig::Jump { intensity, marks } => {
                check_horizon("driver.intensity.breakpoints", intensity.horizon())?;
                for (k, v) in intensity.values().iter().enumerate() {
                    if v.shape() != (p, q) {
                        return Err(ConfigError::new(
                            format!("driver.intensity.values[{k}]"),
                            format!(
                                "shape {}x{} must match dims.p x dims.q = {p}x{q}",
                                v.rows(),
                                v.cols()
                            ),
                        ));
                    }
                }
                let intensity = IntensitySpec::new(intensity.clone())
                    .map_err(|e| ConfigError::new("driver.intensity", e))?;
                CompiledDriver::Jump {
                    intensity,
                    marks: *marks,
                }
            }
            DriverConfig::Brownian { cells_per_piece } => {
                if *cells_per_piece == 0 {
                    return Err(ConfigError::new(
                        "driver.cells_per_piece",
                        "must be at least 1",
                    ));
                }
                let coarse = merge_breakpoints(&[tensor.breakpoints(), self.c.breakpoints()])
                    .map_err(|e| ConfigError::new("coefficients", e))?;
                let mut grid = Vec::with_capacity(coarse.len() * cells_per_piece);
                for w in coarse.windows(2) {
                    grid.push(w[0]);
                    for cell in 1..*cells_per_piece {
                        grid.push(w[0] + (w[1] - w[0]) * cell as f64 / *cells_per_piece as f64);
                    }
                }
                grid.push(self.horizon);
                CompiledDriver::Brownian { grid }
            }
        };

        if let Some(preset) = &self.preset {
            let bound = preset
                .closed_form()
                .map_err(|e| ConfigError::new("preset", e))?;
            if bound.dims != (m, n) {
                return Err(ConfigError::new(
                    "preset",
                    format!(
                        "preset martingale dims {:?} disagree with dims.m x dims.n = ({m}, {n})",
                        bound.dims
                    ),
                ));
            }
        }

        Ok(CompiledScenario {
            name: self.name.clone(),
            dims: self.dims,
            horizon: self.horizon,
            tensor,
            c: self.c.clone(),
            driver,
            preset: self.preset.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub enum CompiledDriver {
    Jump {
        intensity: IntensitySpec,
        marks: JumpMarkSpec,
    },
    Brownian {
        grid: Vec<f64>,
    },
}

/// Errors raised while running a compiled scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("variance report invariant violated: {0}")]
    ReportInvariant(String),
}

/// Runnable scenario with the coefficient tensor materialized.
#[derive(Debug, Clone)]
pub struct CompiledScenario {
    pub name: String,
    pub dims: Dims,
    pub horizon: f64,
    pub tensor: PiecewiseProcess<Rank4Tensor>,
    pub c: PiecewiseProcess<Matrix>,
    pub driver: CompiledDriver,
    pub preset: Option<Preset>,
}

impl CompiledScenario {
    /// Martingale shape `(m, n)`.
    pub fn out_dims(&self) -> (usize, usize) {
        (self.dims.m, self.dims.n)
    }

    pub fn is_jump(&self) -> bool {
        matches!(self.driver, CompiledDriver::Jump { .. })
    }

    /// Almost-sure mark bound; zero for Brownian drivers.
    pub fn jmax(&self) -> f64 {
        match &self.driver {
            CompiledDriver::Jump { marks, .. } => marks.max_abs(),
            CompiledDriver::Brownian { .. } => 0.0,
        }
    }

    pub fn driver_weight(&self) -> DriverWeight<'_> {
        match &self.driver {
            CompiledDriver::Jump { intensity, marks } => DriverWeight::Jump {
                intensity: intensity.pieces(),
                marks,
            },
            CompiledDriver::Brownian { .. } => DriverWeight::Brownian,
        }
    }

    /// Simulates one path of the martingale for the given replicate.
    pub fn simulate(&self, master_seed: u64, replicate: u64) -> Result<MartingalePath, ScenarioError> {
        let streams = ReplicateStreams::new(master_seed, replicate);
        match &self.driver {
            CompiledDriver::Jump { intensity, marks } => {
                let path = simulate_counting(intensity, marks, &streams)?;
                let stream = martingale_jump_stream(&path, marks, intensity);
                Ok(integrate_jump(&self.tensor, &self.c, &stream)?)
            }
            CompiledDriver::Brownian { grid } => {
                let path = simulate_brownian((self.dims.p, self.dims.q), grid, &streams)?;
                Ok(integrate_brownian(&self.tensor, &self.c, &path)?)
            }
        }
    }

    /// Full analytic variance report at the scenario horizon.
    pub fn variance_report(&self) -> Result<VarianceReport, ScenarioError> {
        VarianceReport::compute(self)
    }

    /// Plug-in threshold at confidence exponent `x` under the chosen tail
    /// statement form (`v` and `b` taken from the analytic pipeline).
    pub fn threshold(&self, x: f64, form: ThresholdForm) -> Result<f64, ScenarioError> {
        let report = self.variance_report()?;
        Ok(form.threshold(&BoundQuery {
            x,
            v: report.sigma_sq,
            b: if form == ThresholdForm::GaussianFolded {
                0.0
            } else {
                report.jump_bound
            },
            dims: self.out_dims(),
        }))
    }
}

/// Analytic summary of one scenario: integrated variance and its top
/// eigenvalue, the per-block norms, the jump bound and the
/// exponential-moment integral (at the conventional argument of three).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceReport {
    pub dims: (usize, usize),
    pub integrated_variance: SymMatrix,
    pub sigma_sq: f64,
    pub jump_bound: f64,
    /// Operator norms of the column block and the row block.
    pub block_norms: (f64, f64),
    pub integrability: SymMatrix,
}

impl VarianceReport {
    pub fn compute(scenario: &CompiledScenario) -> Result<Self, ScenarioError> {
        let (m, n) = scenario.out_dims();
        let weight = scenario.driver_weight();
        let v = integrated_variance(&scenario.tensor, &scenario.c, &weight, scenario.horizon)?;
        let s2 = sigma_sq(&v);
        let blocks = (
            v.leading_block(m).operator_norm(),
            v.trailing_block(m).operator_norm(),
        );
        let b = if scenario.is_jump() {
            jump_bound(&scenario.tensor, &scenario.c, scenario.jmax(), scenario.horizon)?
        } else {
            0.0
        };
        let integrability =
            integrability_integral(&scenario.tensor, &scenario.c, &weight, scenario.horizon, 3.0)?;

        let scale = v.frobenius_norm().max(1.0);
        if v.lambda_min() < -1e-10 * scale {
            return Err(ScenarioError::ReportInvariant(format!(
                "integrated variance not psd: min eigenvalue {}",
                v.lambda_min()
            )));
        }
        if (s2 - blocks.0.max(blocks.1)).abs() > 1e-10 * s2.max(1.0) {
            return Err(ScenarioError::ReportInvariant(format!(
                "sigma_sq {s2} disagrees with block norms {blocks:?}"
            )));
        }
        Ok(VarianceReport {
            dims: (m, n),
            integrated_variance: v,
            sigma_sq: s2,
            jump_bound: b,
            block_norms: blocks,
            integrability,
        })
    }
}

/// General-pipeline scenario instantiating a closed-form preset.
pub fn scenario_for_preset(preset: &Preset, name: &str) -> ScenarioConfig {
    match preset {
        Preset::CountingMatrix { c, intensity } => {
            let (p, q) = intensity.dims();
            let horizon = c.horizon();
            ScenarioConfig {
                name: name.to_string(),
                dims: Dims { m: p, n: q, p, q },
                horizon,
                driver: DriverConfig::Jump {
                    intensity: intensity.pieces().clone(),
                    marks: JumpMarkSpec::constant_one(),
                },
                coefficients: CoefficientConfig::Factored {
                    left: PiecewiseProcess::constant(horizon, Matrix::identity(p)),
                    right: PiecewiseProcess::constant(horizon, Matrix::identity(q)),
                },
                c: c.clone(),
                preset: Some(preset.clone()),
            }
        }
        Preset::ScalarPointProcess { weights, intensity } => {
            let k = weights.values()[0].cols();
            let horizon = weights.horizon();
            ScenarioConfig {
                name: name.to_string(),
                dims: Dims {
                    m: 1,
                    n: 1,
                    p: k,
                    q: 1,
                },
                horizon,
                driver: DriverConfig::Jump {
                    intensity: intensity.pieces().clone(),
                    marks: JumpMarkSpec::constant_one(),
                },
                coefficients: CoefficientConfig::Factored {
                    left: weights.clone(),
                    right: PiecewiseProcess::constant(horizon, Matrix::identity(1)),
                },
                c: PiecewiseProcess::constant(horizon, Matrix::filled(k, 1, 1.0)),
                preset: Some(preset.clone()),
            }
        }
        Preset::StaticGaussian { c } => {
            let (rows, cols) = c.shape();
            ScenarioConfig {
                name: name.to_string(),
                dims: Dims {
                    m: rows,
                    n: cols,
                    p: rows,
                    q: cols,
                },
                horizon: 1.0,
                driver: DriverConfig::Brownian { cells_per_piece: 1 },
                coefficients: CoefficientConfig::Factored {
                    left: PiecewiseProcess::constant(1.0, Matrix::identity(rows)),
                    right: PiecewiseProcess::constant(1.0, Matrix::identity(cols)),
                },
                c: PiecewiseProcess::constant(1.0, c.clone()),
                preset: Some(preset.clone()),
            }
        }
        Preset::StaticPoisson { lam } => {
            let (rows, cols) = lam.shape();
            ScenarioConfig {
                name: name.to_string(),
                dims: Dims {
                    m: rows,
                    n: cols,
                    p: rows,
                    q: cols,
                },
                horizon: 1.0,
                driver: DriverConfig::Jump {
                    intensity: PiecewiseProcess::constant(1.0, lam.clone()),
                    marks: JumpMarkSpec::constant_one(),
                },
                coefficients: CoefficientConfig::Factored {
                    left: PiecewiseProcess::constant(1.0, Matrix::identity(rows)),
                    right: PiecewiseProcess::constant(1.0, Matrix::identity(cols)),
                },
                c: PiecewiseProcess::constant(1.0, Matrix::filled(rows, cols, 1.0)),
                preset: Some(preset.clone()),
            }
        }
        Preset::TroppContinuous { integrand } => {
            let (m, n) = integrand.values()[0].shape();
            let horizon = integrand.horizon();
            ScenarioConfig {
                name: name.to_string(),
                dims: Dims { m, n, p: 1, q: 1 },
                horizon,
                driver: DriverConfig::Brownian { cells_per_piece: 1 },
                coefficients: CoefficientConfig::MatrixIntegrand {
                    integrand: integrand.clone(),
                },
                c: PiecewiseProcess::constant(horizon, Matrix::filled(1, 1, 1.0)),
                preset: Some(preset.clone()),
            }
        }
    }
}

#[cfg(test)]
#[path = "scenario_tests.rs"]
mod tests;
