//! Hölder functions, piecewise smooth targets and regression datasets.

mod dataset;
mod holder;
mod pieces;

pub use dataset::{gen_dataset, Dataset};
pub use holder::{cosine_series, sample_holder, Family, HolderFn, COSINE_K, PROBE};
pub use pieces::{eval_piecewise, make_pieces, named_target, named_target_with, Boundary, PieceSpec, PiecewiseSmoothFn, TARGET_NAMES};

use serde::{Deserialize, Serialize};

/// Support of the design distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// `[0, 1]^D`
    UnitCube,
    /// `[-1, 1]^D`
    Symmetric,
}

impl Domain {
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Domain::UnitCube => (0.0, 1.0),
            Domain::Symmetric => (-1.0, 1.0),
        }
    }

    pub fn volume(&self, dim: usize) -> f64 {
        let (lo, hi) = self.bounds();
        (hi - lo).powi(dim as i32)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = self.bounds();
        x.iter().all(|&v| (lo..=hi).contains(&v))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::UnitCube => "unit-cube",
            Domain::Symmetric => "symmetric",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        match s {
            "unit-cube" => Ok(Domain::UnitCube),
            "symmetric" => Ok(Domain::Symmetric),
            _ => Err(crate::Error::Parse(format!("unknown domain '{s}'"))),
        }
    }
}

/// A regression function `f*` with its domain.
pub trait Target: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn domain(&self) -> Domain;
    fn describe(&self) -> String;
}
