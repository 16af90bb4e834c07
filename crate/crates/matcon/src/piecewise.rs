//! Deterministic piecewise-constant processes on `[0, horizon]`.
//!
//! Values live on left-closed right-open intervals `[t_k, t_{k+1})`. At a
//! driver jump time the coefficient seen by the integral is the left limit,
//! so a jump landing exactly on a breakpoint reads the previous interval's
//! value.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PiecewiseError {
    #[error("need at least two breakpoints (got {0})")]
    TooFewBreakpoints(usize),
    #[error("breakpoints must start at 0 (got {0})")]
    NonZeroStart(f64),
    #[error("breakpoints must be finite and strictly increasing (violation at index {0})")]
    NotIncreasing(usize),
    #[error("expected {expected} piece values for {breakpoints} breakpoints, got {got}")]
    ValueCountMismatch {
        expected: usize,
        got: usize,
        breakpoints: usize,
    },
    #[error("time {t} outside [0, {horizon}]")]
    OutOfRange { t: f64, horizon: f64 },
    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise<T>", into = "RawPiecewise<T>")]
#[serde(bound(
    serialize = "T: Serialize + Clone",
    deserialize = "T: Deserialize<'de> + Clone"
))]
pub struct PiecewiseProcess<T: Clone> {
    breakpoints: Vec<f64>,
    values: Vec<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPiecewise<T> {
    breakpoints: Vec<f64>,
    values: Vec<T>,
}

impl<T: Clone> PiecewiseProcess<T> {
    pub fn new(breakpoints: Vec<f64>, values: Vec<T>) -> Result<Self, PiecewiseError> {
        if breakpoints.len() < 2 {
            return Err(PiecewiseError::TooFewBreakpoints(breakpoints.len()));
        }
        if breakpoints[0] != 0.0 {
            return Err(PiecewiseError::NonZeroStart(breakpoints[0]));
        }
        for i in 1..breakpoints.len() {
            if !breakpoints[i].is_finite() || breakpoints[i] <= breakpoints[i - 1] {
                return Err(PiecewiseError::NotIncreasing(i));
            }
        }
        if values.len() != breakpoints.len() - 1 {
            return Err(PiecewiseError::ValueCountMismatch {
                expected: breakpoints.len() - 1,
                got: values.len(),
                breakpoints: breakpoints.len(),
            });
        }
        Ok(PiecewiseProcess {
            breakpoints,
            values,
        })
    }

    pub fn constant(horizon: f64, value: T) -> Self {
        PiecewiseProcess::new(vec![0.0, horizon], vec![value]).expect("positive horizon")
    }

    pub fn horizon(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    fn piece_index(&self, t: f64) -> Result<usize, PiecewiseError> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(PiecewiseError::OutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        // partition_point gives the first breakpoint > t
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        Ok(idx.min(self.values.len()).saturating_sub(1).min(self.values.len() - 1))
    }

    /// Value on the interval containing `t` (right-continuous convention;
    /// `t == horizon` reads the last piece).
    pub fn value_at(&self, t: f64) -> Result<&T, PiecewiseError> {
        Ok(&self.values[self.piece_index(t)?])
    }

    /// Left limit at `t`: the value seen by a predictable integrand when the
    /// driver jumps exactly at `t`.
    pub fn value_before(&self, t: f64) -> Result<&T, PiecewiseError> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(PiecewiseError::OutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        let idx = self.breakpoints.partition_point(|&b| b < t);
        Ok(&self.values[idx.saturating_sub(1).min(self.values.len() - 1)])
    }

    /// Constant pieces `(start, end, value)` intersected with `[0, t]`.
    pub fn pieces_until(&self, t: f64) -> Result<Vec<(f64, f64, &T)>, PiecewiseError> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(PiecewiseError::OutOfRange {
                t,
                horizon: self.horizon(),
            });
        }
        let mut out = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            let start = self.breakpoints[i];
            let end = self.breakpoints[i + 1].min(t);
            if end <= start {
                break;
            }
            out.push((start, end, v));
        }
        Ok(out)
    }

    pub fn pieces(&self) -> Vec<(f64, f64, &T)> {
        self.pieces_until(self.horizon()).unwrap()
    }

    /// Re-expresses the process on a finer breakpoint grid. The grid must
    /// contain every existing breakpoint, so each new piece lies inside one
    /// old piece and values are copied, never interpolated.
    pub fn resample(&self, breakpoints: &[f64]) -> Result<Self, PiecewiseError> {
        for (i, b) in self.breakpoints.iter().enumerate() {
            if !breakpoints.contains(b) {
                return Err(PiecewiseError::NotIncreasing(i));
            }
        }
        let values = breakpoints[..breakpoints.len() - 1]
            .iter()
            .map(|&start| self.value_at(start).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        PiecewiseProcess::new(breakpoints.to_vec(), values)
    }

    /// Restriction to `[0, horizon]`; the last piece is truncated.
    pub fn clipped(&self, horizon: f64) -> Result<Self, PiecewiseError> {
        if self.horizon() == horizon {
            return Ok(self.clone());
        }
        let pieces = self.pieces_until(horizon)?;
        let mut breakpoints: Vec<f64> = pieces.iter().map(|(s, _, _)| *s).collect();
        breakpoints.push(horizon);
        let values = pieces.into_iter().map(|(_, _, v)| v.clone()).collect();
        PiecewiseProcess::new(breakpoints, values)
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> PiecewiseProcess<U> {
        PiecewiseProcess {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}

/// Sorted union of breakpoint lists. All lists must agree on the horizon.
pub fn merge_breakpoints(lists: &[&[f64]]) -> Result<Vec<f64>, PiecewiseError> {
    let horizon = *lists
        .first()
        .and_then(|l| l.last())
        .ok_or(PiecewiseError::TooFewBreakpoints(0))?;
    let mut merged: Vec<f64> = Vec::new();
    for list in lists {
        let h = *list.last().unwrap();
        if h != horizon {
            return Err(PiecewiseError::HorizonMismatch(horizon, h));
        }
        merged.extend_from_slice(list);
    }
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    merged.dedup();
    Ok(merged)
}

impl<T: Clone> TryFrom<RawPiecewise<T>> for PiecewiseProcess<T> {
    type Error = PiecewiseError;
    fn try_from(raw: RawPiecewise<T>) -> Result<Self, Self::Error> {
        PiecewiseProcess::new(raw.breakpoints, raw.values)
    }
}

impl<T: Clone> From<PiecewiseProcess<T>> for RawPiecewise<T> {
    fn from(p: PiecewiseProcess<T>) -> Self {
        RawPiecewise {
            breakpoints: p.breakpoints,
            values: p.values,
        }
    }
}
