//! matcon — simulation and verification toolkit for the concentration of
//! continuous-time matrix martingales.
//!
//! The library builds matrix martingales driven either by compensated matrix
//! counting processes with bounded i.i.d. jump marks or by matrices of
//! independent Brownian motions, computes the analytic quantities entering
//! Freedman-type operator-norm tail bounds (variance proxy, jump bound,
//! thresholds), and verifies every bound by seeded Monte Carlo together with
//! deterministic positive-semidefinite property checks.
//!
//! Modules:
//! - [`linalg`]: dense matrices, rank-4 tensors, symmetric eigen-analysis.
//! - [`piecewise`]: deterministic piecewise-constant coefficient processes.
//! - [`sim`]: driver path generation (counting and Brownian).
//! - [`martingale`]: pathwise construction of the integral martingale.
//! - [`bounds`]: variance proxies, jump bounds, tail thresholds.
//! - [`scenario`]: experiment configuration and compilation.
//! - [`checks`]: Monte Carlo and psd verification of each inequality.
//! - [`report`]: machine-readable result artifacts.

pub mod bounds;
pub mod checks;
pub mod linalg;
pub mod martingale;
pub mod piecewise;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;
