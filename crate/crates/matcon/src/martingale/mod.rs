//! Pathwise construction of the matrix martingale
//! `Z_t = int_0^t T_s o (C_s (Hadamard) dM_s)` for both driver families.
//!
//! Jump drivers are integrated event by event with the drift accumulated in
//! closed form per constant coefficient piece, so there is no grid error at
//! all. Brownian drivers are integrated on grids that must contain every
//! coefficient breakpoint; with piecewise-constant integrands the law of the
//! result is then exact rather than an Euler approximation.

use thiserror::Error;

use crate::linalg::{LinalgError, Matrix, Rank4Tensor, SymMatrix};
use crate::piecewise::{merge_breakpoints, PiecewiseError, PiecewiseProcess};
use crate::sim::{BrownianPath, JumpStream};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("coefficient dims {coeff:?} do not match driver dims {driver:?}")]
    DriverDimMismatch {
        coeff: (usize, usize),
        driver: (usize, usize),
    },
    #[error("tensor input shape {tensor:?} does not match C shape {c:?}")]
    CoefficientDimMismatch {
        tensor: (usize, usize),
        c: (usize, usize),
    },
    #[error("coefficient horizon {coeff} shorter than driver horizon {driver}")]
    HorizonTooShort { coeff: f64, driver: f64 },
    #[error("integration grid is missing coefficient breakpoint {0}")]
    GridMissingBreakpoint(f64),
    #[error("piecewise values disagree in shape at piece {0}")]
    InconsistentPieces(usize),
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One discontinuity of the integral along a jump-driver path.
#[derive(Debug, Clone)]
pub struct PathJump {
    pub time: f64,
    /// Driver entry that jumped.
    pub entry: (usize, usize),
    /// The discontinuity `Z_t - Z_{t^-}`.
    pub increment: Matrix,
    /// Value right after the jump (drift included up to `time`).
    pub value_after: Matrix,
}

#[derive(Debug, Clone)]
enum PathDetail {
    Jump {
        events: Vec<PathJump>,
        terminal: Matrix,
    },
    Grid {
        times: Vec<f64>,
        values: Vec<Matrix>,
    },
}

/// One realization of the matrix martingale, starting from zero.
#[derive(Debug, Clone)]
pub struct MartingalePath {
    dims: (usize, usize),
    horizon: f64,
    detail: PathDetail,
}

impl MartingalePath {
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn terminal_value(&self) -> &Matrix {
        match &self.detail {
            PathDetail::Jump { terminal, .. } => terminal,
            PathDetail::Grid { values, .. } => values.last().unwrap(),
        }
    }

    pub fn jump_events(&self) -> Option<&[PathJump]> {
        match &self.detail {
            PathDetail::Jump { events, .. } => Some(events),
            PathDetail::Grid { .. } => None,
        }
    }

    pub fn grid_values(&self) -> Option<(&[f64], &[Matrix])> {
        match &self.detail {
            PathDetail::Grid { times, values } => Some((times, values)),
            PathDetail::Jump { .. } => None,
        }
    }

    /// Realized column and row covariation blocks of the path:
    /// the sums over increments of `dZ dZ^T` (size m) and `dZ^T dZ` (size n).
    /// Jump paths sum their discontinuities; grid paths sum cell differences.
    pub fn realized_covariations(&self) -> (SymMatrix, SymMatrix) {
        let (m, n) = self.dims;
        let mut col = SymMatrix::zeros(m);
        let mut row = SymMatrix::zeros(n);
        let mut absorb = |dz: &Matrix| {
            col.add_scaled_assign(&dz.gram_left(), 1.0);
            row.add_scaled_assign(&dz.gram_right(), 1.0);
        };
        match &self.detail {
            PathDetail::Jump { events, .. } => {
                for ev in events {
                    absorb(&ev.increment);
                }
            }
            PathDetail::Grid { values, .. } => {
                for w in values.windows(2) {
                    absorb(&w[1].sub(&w[0]).expect("uniform shapes"));
                }
            }
        }
        (col, row)
    }
}

fn check_coefficients(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver_dims: (usize, usize),
    driver_horizon: f64,
) -> Result<(usize, usize), EngineError> {
    let dims = tensor.values()[0].dims();
    for (k, t) in tensor.values().iter().enumerate() {
        if t.dims() != dims {
            return Err(EngineError::InconsistentPieces(k));
        }
    }
    let c_shape = c.values()[0].shape();
    for (k, v) in c.values().iter().enumerate() {
        if v.shape() != c_shape {
            return Err(EngineError::InconsistentPieces(k));
        }
    }
    if (dims.2, dims.3) != c_shape {
        return Err(EngineError::CoefficientDimMismatch {
            tensor: (dims.2, dims.3),
            c: c_shape,
        });
    }
    if c_shape != driver_dims {
        return Err(EngineError::DriverDimMismatch {
            coeff: c_shape,
            driver: driver_dims,
        });
    }
    let coeff_horizon = tensor.horizon().min(c.horizon());
    if coeff_horizon < driver_horizon {
        return Err(EngineError::HorizonTooShort {
            coeff: coeff_horizon,
            driver: driver_horizon,
        });
    }
    Ok((dims.0, dims.1))
}

/// Integrates one jump-driver realization. Each driver jump at entry `(k, l)`
/// with mark `J` adds `J * C[k, l] * T[., .; k, l]` (coefficients evaluated
/// at their left limit); between events the path drifts at the exact rate
/// `-T o (C (Hadamard) drift_rate)` per constant piece.
pub fn integrate_jump(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &JumpStream,
) -> Result<MartingalePath, EngineError> {
    let (m, n) = check_coefficients(tensor, c, driver.dims, driver.horizon)?;
    let tensor = tensor.clipped(driver.horizon)?;
    let c = c.clipped(driver.horizon)?;

    let merged = merge_breakpoints(&[
        tensor.breakpoints(),
        c.breakpoints(),
        driver.drift_rate.breakpoints(),
    ])?;
    // drift rate of Z per merged constant piece
    let mut drift: Vec<(f64, f64, Matrix)> = Vec::with_capacity(merged.len() - 1);
    for w in merged.windows(2) {
        let t_mid = w[0];
        let rate = tensor
            .value_at(t_mid)?
            .apply(&c.value_at(t_mid)?.hadamard(driver.drift_rate.value_at(t_mid)?)?)?;
        drift.push((w[0], w[1], rate));
    }
    let drift_between = |z: &mut Matrix, from: f64, to: f64| {
        for (start, end, rate) in &drift {
            let lo = from.max(*start);
            let hi = to.min(*end);
            if hi > lo {
                z.add_scaled_assign(rate, -(hi - lo));
            }
        }
    };

    let mut z = Matrix::zeros(m, n);
    let mut clock = 0.0;
    let mut events = Vec::with_capacity(driver.events.len());
    for ev in &driver.events {
        drift_between(&mut z, clock, ev.time);
        clock = ev.time;
        let scale = ev.mark * c.value_before(ev.time)?.get(ev.row, ev.col);
        let mut increment = Matrix::zeros(m, n);
        tensor
            .value_before(ev.time)?
            .add_slice_scaled(&mut increment, ev.row, ev.col, scale);
        z.add_scaled_assign(&increment, 1.0);
        events.push(PathJump {
            time: ev.time,
            entry: (ev.row, ev.col),
            increment,
            value_after: z.clone(),
        });
    }
    drift_between(&mut z, clock, driver.horizon);

    Ok(MartingalePath {
        dims: (m, n),
        horizon: driver.horizon,
        detail: PathDetail::Jump {
            events,
            terminal: z,
        },
    })
}

/// Integrates one Brownian realization on its grid. The grid must contain
/// every coefficient breakpoint; interpolating across one would silently
/// change the law of the result, so a missing breakpoint is a hard error.
pub fn integrate_brownian(
    tensor: &PiecewiseProcess<Rank4Tensor>,
    c: &PiecewiseProcess<Matrix>,
    driver: &BrownianPath,
) -> Result<MartingalePath, EngineError> {
    let grid = driver.grid();
    let horizon = grid.last().copied().unwrap_or(0.0);
    let (m, n) = check_coefficients(tensor, c, driver.dims(), horizon)?;
    for proc_breaks in [tensor.breakpoints(), c.breakpoints()] {
        for &b in proc_breaks {
            if b < horizon && !grid.contains(&b) {
                return Err(EngineError::GridMissingBreakpoint(b));
            }
        }
    }

    let mut values = Vec::with_capacity(grid.len());
    let mut z = Matrix::zeros(m, n);
    values.push(z.clone());
    for (cell, inc) in driver.increments().iter().enumerate() {
        let t = grid[cell];
        let dz = tensor.value_at(t)?.apply(&c.value_at(t)?.hadamard(inc)?)?;
        z = z.add(&dz)?;
        values.push(z.clone());
    }
    Ok(MartingalePath {
        dims: (m, n),
        horizon,
        detail: PathDetail::Grid {
            times: grid.to_vec(),
            values,
        },
    })
}

/// Tensor process of the two-sided form `X -> A_s X B_s`
/// (`T[i, j; k, l] = A[i, k] B[l, j]`), on the merged breakpoints.
pub fn sandwich_tensor(
    a: &PiecewiseProcess<Matrix>,
    b: &PiecewiseProcess<Matrix>,
) -> Result<PiecewiseProcess<Rank4Tensor>, EngineError> {
    let a_shape = a.values()[0].shape();
    let b_shape = b.values()[0].shape();
    for (k, v) in a.values().iter().enumerate() {
        if v.shape() != a_shape {
            return Err(EngineError::InconsistentPieces(k));
        }
    }
    for (k, v) in b.values().iter().enumerate() {
        if v.shape() != b_shape {
            return Err(EngineError::InconsistentPieces(k));
        }
    }
    let merged = merge_breakpoints(&[a.breakpoints(), b.breakpoints()])?;
    let (m, p) = a_shape;
    let (q, n) = b_shape;
    let values = merged[..merged.len() - 1]
        .iter()
        .map(|&start| {
            let av = a.value_at(start)?;
            let bv = b.value_at(start)?;
            Ok(Rank4Tensor::from_fn(m, n, p, q, |i, j, k, l| {
                av.get(i, k) * bv.get(l, j)
            }))
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(PiecewiseProcess::new(merged, values)?)
}

/// Tensor process of a matrix integrand against a scalar driver:
/// `Z_t = int A_s dM_s`, i.e. a `m x n x 1 x 1` tensor with
/// `T[i, j; 0, 0] = A[i, j]`.
pub fn matrix_integrand_tensor(a: &PiecewiseProcess<Matrix>) -> PiecewiseProcess<Rank4Tensor> {
    a.map(|av| {
        let (m, n) = av.shape();
        Rank4Tensor::from_fn(m, n, 1, 1, |i, j, _, _| av.get(i, j))
    })
}
