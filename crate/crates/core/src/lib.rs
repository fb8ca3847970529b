//! Desk-scale laboratory for deep-network approximation of piecewise
//! smooth functions.
//!
//! * [`network`] — feed-forward networks, size metrics and combinators.
//! * [`constructor`] — explicit approximating networks (saw-tooth squaring,
//!   multiplication, monomials, steps, Taylor-on-cubes, indicators, and the
//!   composite piecewise approximator).
//! * [`funcgen`] — Hölder functions, piecewise smooth targets and datasets.
//! * [`estimators`] — DNN least squares, kernel ridge, Haar wavelet and
//!   curvelet series estimators.
//! * [`harness`] — L² errors, rate sweeps, slope fits and rate calculators.

pub mod constructor;
pub mod error;
pub mod estimators;
pub mod funcgen;
pub mod harness;
pub mod network;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use network::{Activation, Network, SizeMetrics};
