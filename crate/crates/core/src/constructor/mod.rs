//! Explicit approximating networks.
//!
//! Every builder here is deterministic: the same parameters give a
//! bit-identical network. Builders that compose multipliers require a
//! piecewise-linear activation and return [`Error::Unsupported`] otherwise;
//! [`monomial_net`] and [`step_net`] also have smooth-activation paths.

mod basic;
mod composite;
mod indicator;
mod monomial;
mod smooth;
mod step;

pub use basic::{
    mult_asym_net, mult_bound, mult_depth_for, mult_net, multi_mult_budget, multi_mult_net, product_bound, product_depth_for,
    product_net, sawtooth_closed_form, sawtooth_net, square_bound, square_net, teeth_net,
};
pub use composite::{piecewise_smooth_build, piecewise_smooth_net, CompositeParams};
pub use indicator::{halfspace_indicator_net, piece_indicator_built, piece_indicator_net, IndicatorParams, Sign};
pub use monomial::{derivative_sup, monomial_built, monomial_net, smooth_monomial, taylor_anchor, SmoothMonomial};
pub use smooth::{box_indicator_net, cube_indicator_net, smooth_build, smooth_net, Region, SmoothParams};
pub use step::{ramp_closed_form, ramp_delta, ramp_l2_error, ramp_step, step_built, step_l2_error, step_net, StepNet, StepPath, STEP_PANELS};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::funcgen::Target;
use crate::network::{Activation, Network};
use crate::quad::{halton, shard_mean_batched, simpson};

/// A network with a proven sup-error bound and a bound on its output.
#[derive(Debug, Clone, PartialEq)]
pub struct Built {
    pub net: Network,
    pub error: f64,
    pub range: f64,
}

pub(crate) fn require_piecewise_linear(act: Activation, what: &str) -> Result<(f64, f64)> {
    act.slopes().ok_or_else(|| {
        Error::Unsupported(format!("{what} construction needs a piecewise-linear activation, got {}", act.name()))
    })
}

/// How a report's error was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    Sup,
    L2,
}

impl ErrorNorm {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorNorm::Sup => "sup",
            ErrorNorm::L2 => "L2",
        }
    }
}

/// A built network with its claimed bound and measured error.
#[derive(Debug, Clone)]
pub struct ApproxReport {
    pub name: String,
    pub network: Network,
    pub target: String,
    pub claimed_bound: f64,
    pub measured_error: f64,
    pub norm: ErrorNorm,
    /// Grid points or quadrature nodes used for the measurement.
    pub grid_size: usize,
    pub params: BTreeMap<String, f64>,
}

impl ApproxReport {
    pub fn within_bound(&self) -> bool {
        self.measured_error <= self.claimed_bound
    }

    pub const CSV_HEADER: &'static str = "construction,target,params,norm,claimed_bound,measured_error,grid_size,L,S,B";

    /// One CSV row; parameters are `name=value` pairs joined by `;`.
    pub fn csv_row(&self) -> String {
        let m = self.network.metrics();
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{},{},{},{},{:e},{:e},{},{},{},{:e}",
            self.name,
            self.target.replace(',', ";"),
            params.join(";"),
            self.norm.name(),
            self.claimed_bound,
            self.measured_error,
            self.grid_size,
            m.depth,
            m.sparsity,
            m.magnitude
        )
    }
}

/// Sup error of a width-1 network against `f` over a tensor grid with
/// `per_axis` points per axis on `[lo, hi]^D`.
pub fn sup_error_grid(net: &Network, f: impl Fn(&[f64]) -> f64, dim: usize, lo: f64, hi: f64, per_axis: usize) -> f64 {
    let mut s = net.scratch();
    let total = per_axis.pow(dim as u32);
    let mut p = vec![0.0; dim];
    let mut sup: f64 = 0.0;
    for idx in 0..total {
        let mut r = idx;
        for v in p.iter_mut() {
            *v = lo + (hi - lo) * (r % per_axis) as f64 / (per_axis - 1) as f64;
            r /= per_axis;
        }
        let g = net.evaluate_with(&p, &mut s).expect("grid point has the network's width")[0];
        sup = sup.max((g - f(&p)).abs());
    }
    sup
}

/// `L²` error of a width-1 network against `f` on the box `[lo, hi]`:
/// composite Simpson in one dimension, Halton QMC otherwise. Returns the
/// (unsquared) norm and the node count.
pub fn l2_error_box<F>(net: &Network, f: F, lo: &[f64], hi: &[f64], points: usize) -> (f64, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = lo.len();
    let vol: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
    if dim == 1 {
        let mut s = net.scratch();
        let v = simpson(
            |x| {
                let g = net.evaluate_with(&[x], &mut s).unwrap()[0];
                (g - f(&[x])).powi(2)
            },
            lo[0],
            hi[0],
            points,
        );
        return (v.max(0.0).sqrt(), points + 1);
    }
    let mut p = halton(points, dim);
    for row in p.chunks_mut(dim) {
        for d in 0..dim {
            row[d] = lo[d] + (hi[d] - lo[d]) * row[d];
        }
    }
    let mean = shard_mean_batched(&p, dim, |chunk| {
        let mut s = net.scratch();
        chunk
            .chunks(dim)
            .map(|x| {
                let g = net.evaluate_with(x, &mut s).unwrap()[0];
                (g - f(x)).powi(2)
            })
            .collect()
    });
    ((mean * vol).max(0.0).sqrt(), points)
}

/// `L²(I^D)` error of a network against a target.
pub fn l2_error_target(net: &Network, f: &dyn Target, points: usize) -> (f64, usize) {
    let (lo, hi) = f.domain().bounds();
    let d = f.dim();
    l2_error_box(net, |x| f.eval(x), &vec![lo; d], &vec![hi; d], points)
}
