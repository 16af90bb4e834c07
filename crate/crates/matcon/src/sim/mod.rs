//! Driver path generation: matrix counting processes with deterministic
//! piecewise-constant intensities and bounded i.i.d. jump marks, and matrices
//! of independent standard Brownian motions on grids.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::piecewise::{PiecewiseError, PiecewiseProcess};
use crate::rng::{ReplicateStreams, StreamKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("intensity entries must be nonnegative (piece {piece}, entry {entry:?})")]
    NegativeIntensity { piece: usize, entry: (usize, usize) },
    #[error("intensity pieces must all be {expected:?}, piece {piece} is {got:?}")]
    IntensityShape {
        piece: usize,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("mark law parameter out of range: {0}")]
    BadMarkLaw(String),
    #[error("grid must be increasing and start at 0")]
    BadGrid,
    #[error("grid time {t} outside the intensity horizon {horizon}")]
    GridOutsideHorizon { t: f64, horizon: f64 },
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error("could not draw distinct jump times after {0} attempts")]
    TieRedrawExhausted(u32),
}

/// Piecewise-constant nonnegative intensity for a `p x q` matrix counting
/// process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseProcess<Matrix>", into = "PiecewiseProcess<Matrix>")]
pub struct IntensitySpec {
    pieces: PiecewiseProcess<Matrix>,
}

impl IntensitySpec {
    pub fn new(pieces: PiecewiseProcess<Matrix>) -> Result<Self, SimError> {
        let dims = pieces.values()[0].shape();
        for (k, v) in pieces.values().iter().enumerate() {
            if v.shape() != dims {
                return Err(SimError::IntensityShape {
                    piece: k,
                    expected: dims,
                    got: v.shape(),
                });
            }
            for i in 0..dims.0 {
                for j in 0..dims.1 {
                    let rate = v.get(i, j);
                    if rate < 0.0 || rate.is_nan() {
                        return Err(SimError::NegativeIntensity {
                            piece: k,
                            entry: (i, j),
                        });
                    }
                }
            }
        }
        Ok(IntensitySpec { pieces })
    }

    pub fn constant(horizon: f64, rate: Matrix) -> Result<Self, SimError> {
        IntensitySpec::new(PiecewiseProcess::constant(horizon, rate))
    }

    pub fn dims(&self) -> (usize, usize) {
        self.pieces.values()[0].shape()
    }

    pub fn horizon(&self) -> f64 {
        self.pieces.horizon()
    }

    pub fn pieces(&self) -> &PiecewiseProcess<Matrix> {
        &self.pieces
    }

    /// Exact integral of the per-entry rate over `[0, t]`.
    pub fn integral(&self, t: f64) -> Result<Matrix, SimError> {
        let (p, q) = self.dims();
        let mut out = Matrix::zeros(p, q);
        for (start, end, lam) in self.pieces.pieces_until(t)? {
            out.add_scaled_assign(lam, end - start);
        }
        Ok(out)
    }
}

impl TryFrom<PiecewiseProcess<Matrix>> for IntensitySpec {
    type Error = SimError;
    fn try_from(p: PiecewiseProcess<Matrix>) -> Result<Self, Self::Error> {
        IntensitySpec::new(p)
    }
}

impl From<IntensitySpec> for PiecewiseProcess<Matrix> {
    fn from(s: IntensitySpec) -> Self {
        s.pieces
    }
}

/// Bounded i.i.d. jump-mark laws with closed-form moments of every order.
/// The same scalar law applies independently to every driver entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkLaw {
    /// Marks constantly one: the driver is a plain counting process.
    ConstantOne,
    /// Uniform on `(-half_width, half_width)`.
    Uniform { half_width: f64 },
    /// `+scale` or `-scale` with equal probability.
    Rademacher { scale: f64 },
    /// `+magnitude` with probability `prob_positive`, else `-magnitude`.
    TwoPoint { magnitude: f64, prob_positive: f64 },
}

/// Mark law together with its analytic moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarkLaw", into = "MarkLaw")]
pub struct JumpMarkSpec {
    law: MarkLaw,
}

impl JumpMarkSpec {
    pub fn new(law: MarkLaw) -> Result<Self, SimError> {
        match law {
            MarkLaw::ConstantOne => {}
            MarkLaw::Uniform { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                return Err(SimError::BadMarkLaw(format!(
                    "uniform half_width must be positive, got {half_width}"
                )));
            }
            MarkLaw::Rademacher { scale } if !(scale > 0.0 && scale.is_finite()) => {
                return Err(SimError::BadMarkLaw(format!(
                    "rademacher scale must be positive, got {scale}"
                )));
            }
            MarkLaw::TwoPoint {
                magnitude,
                prob_positive,
            } if !(magnitude > 0.0 && magnitude.is_finite())
                || !(0.0..=1.0).contains(&prob_positive) =>
            {
                return Err(SimError::BadMarkLaw(format!(
                    "two_point needs magnitude > 0 and prob_positive in [0, 1], got {magnitude}, {prob_positive}"
                )));
            }
            _ => {}
        }
        Ok(JumpMarkSpec { law })
    }

    pub fn constant_one() -> Self {
        JumpMarkSpec {
            law: MarkLaw::ConstantOne,
        }
    }

    pub fn law(&self) -> MarkLaw {
        self.law
    }

    /// Almost-sure bound on the mark magnitude.
    pub fn max_abs(&self) -> f64 {
        match self.law {
            MarkLaw::ConstantOne => 1.0,
            MarkLaw::Uniform { half_width } => half_width,
            MarkLaw::Rademacher { scale } => scale,
            MarkLaw::TwoPoint { magnitude, .. } => magnitude,
        }
    }

    /// Signed moment `E[J^order]`, exact for every order.
    pub fn moment(&self, order: u32) -> f64 {
        if order == 0 {
            return 1.0;
        }
        match self.law {
            MarkLaw::ConstantOne => 1.0,
            MarkLaw::Uniform { half_width } => {
                if order % 2 == 1 {
                    0.0
                } else {
                    half_width.powi(order as i32) / (order as f64 + 1.0)
                }
            }
            MarkLaw::Rademacher { scale } => {
                if order % 2 == 1 {
                    0.0
                } else {
                    scale.powi(order as i32)
                }
            }
            MarkLaw::TwoPoint {
                magnitude,
                prob_positive,
            } => {
                let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
                magnitude.powi(order as i32) * (prob_positive + sign * (1.0 - prob_positive))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    /// `E[J]` as a `p x q` matrix (the law is shared by all entries).
    pub fn mean_matrix(&self, p: usize, q: usize) -> Matrix {
        Matrix::filled(p, q, self.mean())
    }

    /// `E[J^2]` entry-wise as a `p x q` matrix.
    pub fn second_moment_matrix(&self, p: usize, q: usize) -> Matrix {
        Matrix::filled(p, q, self.second_moment())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self.law {
            MarkLaw::ConstantOne => 1.0,
            MarkLaw::Uniform { half_width } => (2.0 * rng.gen::<f64>() - 1.0) * half_width,
            MarkLaw::Rademacher { scale } => {
                if rng.gen::<bool>() {
                    scale
                } else {
                    -scale
                }
            }
            MarkLaw::TwoPoint {
                magnitude,
                prob_positive,
            } => {
                if rng.gen::<f64>() < prob_positive {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }
}

impl TryFrom<MarkLaw> for JumpMarkSpec {
    type Error = SimError;
    fn try_from(law: MarkLaw) -> Result<Self, Self::Error> {
        JumpMarkSpec::new(law)
    }
}

impl From<JumpMarkSpec> for MarkLaw {
    fn from(s: JumpMarkSpec) -> Self {
        s.law
    }
}

/// One realization of the marked matrix counting process: per entry, the
/// strictly increasing jump times with their marks. Across entries all jump
/// times are pairwise distinct.
#[derive(Debug, Clone)]
pub struct CountingPath {
    dims: (usize, usize),
    horizon: f64,
    /// `jumps[i * q + j]` lists `(time, mark)` for entry `(i, j)`.
    jumps: Vec<Vec<(f64, f64)>>,
}

impl CountingPath {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn entry_jumps(&self, i: usize, j: usize) -> &[(f64, f64)] {
        &self.jumps[i * self.dims.1 + j]
    }

    pub fn total_jumps(&self) -> usize {
        self.jumps.iter().map(Vec::len).sum()
    }

    /// Counting value `N_t` entry-wise.
    pub fn counts_at(&self, t: f64) -> Matrix {
        Matrix::from_fn(self.dims.0, self.dims.1, |i, j| {
            self.entry_jumps(i, j)
                .iter()
                .filter(|(time, _)| *time <= t)
                .count() as f64
        })
    }
}

const MAX_TIE_REDRAWS: u32 = 64;

/// Samples the marked counting path by exact inversion: one unit-exponential
/// hazard budget per arrival, spent across the constant-rate pieces, so no
/// grid is involved and ties across entries have probability zero. An exact
/// floating-point tie triggers a redraw of one offending entry.
pub fn simulate_counting(
    intensity: &IntensitySpec,
    marks: &JumpMarkSpec,
    streams: &ReplicateStreams,
) -> Result<CountingPath, SimError> {
    let (p, q) = intensity.dims();
    let mut attempts = vec![0u64; p * q];
    let mut jumps: Vec<Vec<(f64, f64)>> = vec![Vec::new(); p * q];
    for i in 0..p {
        for j in 0..q {
            jumps[i * q + j] = sample_entry(intensity, marks, streams, i, j, 0);
        }
    }

    // enforce pairwise-distinct jump times across all entries
    for _ in 0..MAX_TIE_REDRAWS {
        match find_tied_entry(&jumps) {
            None => {
                return Ok(CountingPath {
                    dims: (p, q),
                    horizon: intensity.horizon(),
                    jumps,
                })
            }
            Some(flat) => {
                attempts[flat] += 1;
                let (i, j) = (flat / q, flat % q);
                jumps[flat] = sample_entry(intensity, marks, streams, i, j, attempts[flat]);
            }
        }
    }
    Err(SimError::TieRedrawExhausted(MAX_TIE_REDRAWS))
}

fn sample_entry(
    intensity: &IntensitySpec,
    marks: &JumpMarkSpec,
    streams: &ReplicateStreams,
    i: usize,
    j: usize,
    attempt: u64,
) -> Vec<(f64, f64)> {
    let mut time_rng = streams.entry_stream(StreamKind::JumpTimes, i, j, attempt);
    let mut mark_rng = streams.entry_stream(StreamKind::JumpMarks, i, j, attempt);
    let mut out = Vec::new();
    let mut budget: f64 = time_rng.sample(Exp1);
    for (start, end, lam) in intensity.pieces().pieces() {
        let rate = lam.get(i, j);
        if rate == 0.0 {
            continue;
        }
        let mut t = start;
        loop {
            let capacity = rate * (end - t);
            if budget > capacity {
                budget -= capacity;
                break;
            }
            t += budget / rate;
            out.push((t, marks.sample(&mut mark_rng)));
            budget = time_rng.sample(Exp1);
        }
    }
    out
}

fn find_tied_entry(jumps: &[Vec<(f64, f64)>]) -> Option<usize> {
    let mut all: Vec<(f64, usize)> = jumps
        .iter()
        .enumerate()
        .flat_map(|(flat, list)| list.iter().map(move |(t, _)| (*t, flat)))
        .collect();
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in all.windows(2) {
        if w[0].0 == w[1].0 {
            return Some(w[1].1);
        }
    }
    None
}

/// Exact compensator values `int_0^t lambda ds` at the given grid times.
pub fn compensator_path(intensity: &IntensitySpec, grid: &[f64]) -> Result<Vec<Matrix>, SimError> {
    grid.iter()
        .map(|&t| {
            if !(0.0..=intensity.horizon()).contains(&t) {
                return Err(SimError::GridOutsideHorizon {
                    t,
                    horizon: intensity.horizon(),
                });
            }
            intensity.integral(t)
        })
        .collect()
}

/// One driver jump of the compensated martingale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub row: usize,
    pub col: usize,
    pub mark: f64,
}

/// Event-plus-drift description of `M_t`: the jump part is the time-ordered
/// event list, the predictable part decreases at the deterministic rate
/// `E[J] (Hadamard) lambda_s`.
#[derive(Debug, Clone)]
pub struct JumpStream {
    pub dims: (usize, usize),
    pub horizon: f64,
    pub events: Vec<JumpEvent>,
    pub drift_rate: PiecewiseProcess<Matrix>,
}

impl JumpStream {
    /// `M_t` reconstructed from events minus the exact drift integral.
    pub fn martingale_at(&self, t: f64) -> Result<Matrix, SimError> {
        let (p, q) = self.dims;
        let mut m = Matrix::zeros(p, q);
        for ev in &self.events {
            if ev.time <= t {
                m.set(ev.row, ev.col, m.get(ev.row, ev.col) + ev.mark);
            }
        }
        for (start, end, rate) in self.drift_rate.pieces_until(t)? {
            m.add_scaled_assign(rate, -(end - start));
        }
        Ok(m)
    }
}

/// Orders the path's jumps into a single event stream and attaches the
/// compensator drift rate.
pub fn martingale_jump_stream(
    path: &CountingPath,
    marks: &JumpMarkSpec,
    intensity: &IntensitySpec,
) -> JumpStream {
    let (p, q) = path.dims();
    let mut events: Vec<JumpEvent> = Vec::with_capacity(path.total_jumps());
    for i in 0..p {
        for j in 0..q {
            events.extend(path.entry_jumps(i, j).iter().map(|&(time, mark)| JumpEvent {
                time,
                row: i,
                col: j,
                mark,
            }));
        }
    }
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap());
    let mean = marks.mean();
    JumpStream {
        dims: (p, q),
        horizon: path.horizon(),
        events,
        drift_rate: intensity.pieces().map(|lam| lam.scale(mean)),
    }
}

/// Independent standard Brownian increments of a `p x q` matrix on a grid.
#[derive(Debug, Clone)]
pub struct BrownianPath {
    dims: (usize, usize),
    grid: Vec<f64>,
    /// `increments[c]` is `M_{t_{c+1}} - M_{t_c}`.
    increments: Vec<Matrix>,
}

impl BrownianPath {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn increments(&self) -> &[Matrix] {
        &self.increments
    }

    /// `M_t` at a grid index by accumulating increments.
    pub fn value_at_index(&self, idx: usize) -> Matrix {
        let (p, q) = self.dims;
        let mut m = Matrix::zeros(p, q);
        for inc in &self.increments[..idx] {
            m.add_scaled_assign(inc, 1.0);
        }
        m
    }
}

/// Samples Gaussian increments with variance `dt` per cell and entry.
pub fn simulate_brownian(
    dims: (usize, usize),
    grid: &[f64],
    streams: &ReplicateStreams,
) -> Result<BrownianPath, SimError> {
    let trivial = grid.is_empty() || (grid.len() == 1 && grid[0] == 0.0);
    let well_formed = !grid.is_empty() && grid[0] == 0.0 && grid.windows(2).all(|w| w[1] > w[0]);
    if !trivial && !well_formed {
        return Err(SimError::BadGrid);
    }
    let (p, q) = dims;
    let cells = grid.len().saturating_sub(1);
    let mut increments = vec![Matrix::zeros(p, q); cells];
    for i in 0..p {
        for j in 0..q {
            let mut rng = streams.entry_stream(StreamKind::BrownianIncrements, i, j, 0);
            for (c, inc) in increments.iter_mut().enumerate() {
                let dt = grid[c + 1] - grid[c];
                let g: f64 = rng.sample(rand_distr::StandardNormal);
                inc.set(i, j, dt.sqrt() * g);
            }
        }
    }
    Ok(BrownianPath {
        dims,
        grid: grid.to_vec(),
        increments,
    })
}

#[cfg(test)]
mod tests;
