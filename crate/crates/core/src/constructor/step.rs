//! Approximation of the Heaviside step `1{x ≥ 0}` in `L²([-T, T])`.

use crate::error::{invalid, Result};
use crate::network::{Activation, Condition, Layer, Network};
use crate::quad::simpson;

/// Panels for one-dimensional quadrature of step errors.
pub const STEP_PANELS: usize = 100_000;

/// Which construction path a step network used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepPath {
    /// Difference of two shifted two-slope ramps (piecewise-linear).
    Ramp,
    /// `η(ax)` for smooth activations with bounded tails (`k = 0`).
    Scaled,
    /// `η(ax + 1/2) - η(ax - 1/2)` for activations with linear right tail
    /// (`k = 1`).
    Difference,
}

/// A step network with its construction data.
#[derive(Debug, Clone, PartialEq)]
pub struct StepNet {
    pub net: Network,
    pub path: StepPath,
    /// Steepness `a`.
    pub a: f64,
    /// Ramp height normalizer `δ` (piecewise-linear path only).
    pub delta: f64,
    /// Analytic `L²([-T,T])` error when available, otherwise the bound.
    pub predicted: f64,
    /// Exponent `p` in `a ∝ ε^{-p}` used for this path.
    pub steepness_exponent: f64,
}

/// `δ = 1 / (c1 - c2²/c1)`, the inverse slope of `η(z) + η(-(c2/c1) z)`.
pub fn ramp_delta(c1: f64, c2: f64) -> f64 {
    1.0 / (c1 - c2 * c2 / c1)
}

/// Exact `L²` distance between the ramp step of steepness `a` and the
/// Heaviside step (when the ramp fits inside the interval).
pub fn ramp_l2_error(delta: f64, a: f64) -> f64 {
    (delta / (12.0 * a)).sqrt()
}

/// `∫_ℝ (g(u) - 1{u ≥ 0})² du` for the unit-steepness smooth step `g`.
fn unit_step_energy(act: Activation, path: StepPath) -> f64 {
    let g = |u: f64| match path {
        StepPath::Scaled => act.apply(u),
        _ => act.apply(u + 0.5) - act.apply(u - 0.5),
    };
    let left = simpson(|u| g(u).powi(2), -80.0, 0.0, 400_000);
    let right = simpson(|u| (g(u) - 1.0).powi(2), 0.0, 80.0, 400_000);
    left + right
}

/// Step network with `‖g_s - 1{· ≥ 0}‖_{L²([-T,T])} ≤ ε`.
pub fn step_net(eps: f64, t: f64, act: Activation) -> Result<Network> {
    Ok(step_built(eps, t, act)?.net)
}

pub fn step_built(eps: f64, t: f64, act: Activation) -> Result<StepNet> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("step accuracy must lie in (0,1), got {eps}"));
    }
    if !(t > 0.0) {
        return invalid("step interval half-width T must be positive");
    }
    match act.condition() {
        Condition::PiecewiseLinear => {
            let (c1, c2) = act.slopes().unwrap();
            let delta = ramp_delta(c1, c2);
            // error sqrt(δ/(12a)), one percent inside the target; the ramp must
            // also fit inside [-T, T]
            let a = (1.01 * delta / (12.0 * eps * eps)).max(delta / (2.0 * t));
            ramp_step(a, act).map(|net| StepNet {
                net,
                path: StepPath::Ramp,
                a,
                delta,
                predicted: ramp_l2_error(delta, a),
                steepness_exponent: 2.0,
            })
        }
        Condition::Smooth => {
            let path = if act.tail_degree() == Some(0) { StepPath::Scaled } else { StepPath::Difference };
            let (a, predicted) = match path {
                StepPath::Scaled => {
                    // |η(u) - 1{u ≥ 0}| ≤ min(1, 1/|u|), so the squared error is at most 4/a
                    let a = 4.0 / (eps * eps);
                    (a, (unit_step_energy(act, path) / a).sqrt())
                }
                _ => {
                    // exact scaling: ‖g(a·) - 1‖²_{L²(ℝ)} = E/a
                    let e = unit_step_energy(act, path);
                    let a = 1.25 * e / (eps * eps);
                    (a, (e / a).sqrt())
                }
            };
            let net = match path {
                StepPath::Scaled => Network::new(
                    vec![Layer::from_dense(1, 1, &[a], vec![0.0])?, Layer::from_dense(1, 1, &[1.0], vec![0.0])?],
                    act,
                )?,
                _ => Network::new(
                    vec![Layer::from_dense(2, 1, &[a, a], vec![0.5, -0.5])?, Layer::from_dense(1, 2, &[1.0, -1.0], vec![0.0])?],
                    act,
                )?,
            };
            Ok(StepNet { net, path, a, delta: 1.0, predicted, steepness_exponent: 2.0 })
        }
    }
}

/// `x ↦ η_s(ax + δ/2) - η_s(ax - δ/2)` with `η_s(z) = η(z) + η(-(c2/c1) z)
/// = z₊/δ`: zero below `-δ/(2a)`, one above `δ/(2a)`, linear between.
pub fn ramp_step(a: f64, act: Activation) -> Result<Network> {
    let (c1, c2) = act.slopes().ok_or_else(|| crate::Error::Unsupported("ramp step needs a piecewise-linear activation".into()))?;
    let delta = ramp_delta(c1, c2);
    let r = c2 / c1;
    let w1 = [a, -r * a, a, -r * a];
    let b1 = vec![delta / 2.0, -r * delta / 2.0, -delta / 2.0, r * delta / 2.0];
    Network::new(vec![Layer::from_dense(4, 1, &w1, b1)?, Layer::from_dense(1, 4, &[1.0, 1.0, -1.0, -1.0], vec![0.0])?], act)
}

/// Closed form of [`ramp_step`].
pub fn ramp_closed_form(a: f64, delta: f64, x: f64) -> f64 {
    ((a * x / delta) + 0.5).clamp(0.0, 1.0)
}

/// `‖net - 1{· ≥ 0}‖_{L²([-T,T])}` by composite Simpson on each half-line
/// (the jump sits on a panel boundary).
pub fn step_l2_error(net: &Network, t: f64, panels: usize) -> f64 {
    let mut s = net.scratch();
    let mut f = |x: f64| net.evaluate_with(&[x], &mut s).unwrap()[0];
    let left = simpson(|x| f(x).powi(2), -t, 0.0, panels / 2);
    let right = simpson(|x| (f(x) - 1.0).powi(2), 0.0, t, panels / 2);
    (left + right).max(0.0).sqrt()
}
