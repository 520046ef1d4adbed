//! Spectral quantities and Ginzburg–Landau minimization for step magnetic
//! fields: the de Gennes constant, Iwatsuka band minima, the corner-step
//! half-plane operator, a closed-form bound-state certificate, linear
//! ground states on bounded domains and the nonlinear onset.

pub mod cert;
pub mod domain;
pub mod eigen;
pub mod error;
pub mod gl;
pub mod halfplane;
pub mod lattice;
pub mod model1d;
pub mod output;
pub mod sparse;

pub use error::{Error, Result};
pub use sparse::C64;

/// Rigorous lower bound for the de Gennes constant.
pub const THETA0_LOW: f64 = 0.590106125 - 1e-9;

/// Reference value of the de Gennes constant used for thresholds.
pub const THETA0: f64 = 0.590106125;
