//! Approximation of `x ↦ x^γ` on `[-T, T]`.

use super::basic::{product_bound, product_depth_for, product_net};
use super::Built;
use crate::error::{invalid, Error, Result};
use crate::network::{compose, Activation, Condition, Layer, Network, MAX_DERIVATIVE};

/// Details of a smooth-activation monomial network.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMonomial {
    pub net: Network,
    /// Taylor anchor `x′`.
    pub anchor: f64,
    /// Input scale `ā`.
    pub scale: f64,
    /// Estimate of `sup |∂^{γ+1} η|` (already inflated).
    pub derivative_bound: f64,
    /// Remainder bound `C / ā` (equals the requested `ε` by construction).
    pub bound: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Constant-`1` network.
fn constant_one(act: Activation) -> Result<Network> {
    Network::affine(1, 1, &[0.0], vec![1.0], act)
}

/// Monomial network with sup error at most `eps` on `[-T, T]`.
pub fn monomial_net(gamma: usize, eps: f64, t: f64, act: Activation) -> Result<Network> {
    Ok(monomial_built(gamma, eps, t, act)?.net)
}

/// As [`monomial_net`], with the error bound and output range.
pub fn monomial_built(gamma: usize, eps: f64, t: f64, act: Activation) -> Result<Built> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("monomial accuracy must lie in (0,1), got {eps}"));
    }
    if !(t > 0.0) {
        return invalid("monomial range T must be positive");
    }
    if gamma == 0 {
        return Ok(Built { net: constant_one(act)?, error: 0.0, range: 1.0 });
    }
    match act.condition() {
        Condition::PiecewiseLinear => {
            if gamma == 1 {
                return Ok(Built { net: Network::deep_identity(1, 2, act)?, error: 0.0, range: t });
            }
            let ranges = vec![t; gamma];
            let m = product_depth_for(&ranges, eps);
            let prod = product_net(&ranges, m, act)?;
            let fan = Network::new(vec![Layer::from_triplets(gamma, 1, (0..gamma).map(|r| (r, 0, 1.0)).collect(), vec![0.0; gamma])?], act)?;
            let net = compose(&prod.net, &fan)?;
            debug_assert!(product_bound(&ranges, m) <= eps || m == 60);
            Ok(Built { net, error: prod.error, range: prod.range })
        }
        Condition::Smooth => {
            let s = smooth_monomial(gamma, eps, t, act)?;
            Ok(Built { net: s.net, error: s.bound, range: t.powi(gamma as i32) + s.bound })
        }
    }
}

/// Anchor maximizing `min_{1≤j≤γ} |∂^j η(x′)|` over a coarse grid on
/// `[-4, 4]`.
pub fn taylor_anchor(gamma: usize, act: Activation) -> f64 {
    let mut best = (f64::MIN, 0.0);
    for i in 0..=800 {
        let x = -4.0 + i as f64 * 0.01;
        let v = (1..=gamma).map(|j| act.derivative(j, x).abs()).fold(f64::INFINITY, f64::min);
        if v > best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// `2 · max |∂^{γ+1} η|` estimated by central differences of the analytic
/// `γ`-th derivative on a grid covering `[-R, R]`, `R = max(10, γT + |x′| + 1)`.
pub fn derivative_sup(gamma: usize, t: f64, anchor: f64, act: Activation) -> f64 {
    let r = 10f64.max(gamma as f64 * t + anchor.abs() + 1.0);
    let n = (r * 400.0).ceil() as usize;
    let h = 1e-4;
    let mut sup: f64 = 0.0;
    for i in 0..=n {
        let x = -r + 2.0 * r * i as f64 / n as f64;
        let d = (act.derivative(gamma, x + h) - act.derivative(gamma, x - h)) / (2.0 * h);
        sup = sup.max(d.abs());
    }
    2.0 * sup
}

/// One hidden layer of `γ+1` units computing the scaled `γ`-th forward
/// difference `ā^γ Δ^γ_{x/ā} η(x′) / ∂^γ η(x′)`.
pub fn smooth_monomial(gamma: usize, eps: f64, t: f64, act: Activation) -> Result<SmoothMonomial> {
    if act.condition() != Condition::Smooth {
        return Err(Error::Unsupported(format!("smooth monomial path needs a smooth activation, got {}", act.name())));
    }
    let budget = act.derivative_budget().unwrap_or(0);
    if gamma > budget + 1 || gamma + 1 > MAX_DERIVATIVE {
        return invalid(format!("monomial degree {gamma} exceeds the derivative budget N+1 = {}", budget + 1));
    }
    let anchor = taylor_anchor(gamma, act);
    let dg = act.derivative(gamma, anchor);
    let m = derivative_sup(gamma, t, anchor, act);
    let stirling: f64 = (0..=gamma).map(|j| binomial(gamma, j) * (j as f64).powi(gamma as i32 + 1)).sum();
    let c = m * t.powi(gamma as i32 + 1) * stirling / (factorial(gamma + 1) * dg.abs());
    let scale = (c / eps).max(1.0);
    let w1: Vec<f64> = (0..=gamma).map(|j| j as f64 / scale).collect();
    let w2: Vec<f64> = (0..=gamma)
        .map(|j| {
            let sign = if (gamma - j) % 2 == 0 { 1.0 } else { -1.0 };
            sign * scale.powi(gamma as i32) * binomial(gamma, j) / dg
        })
        .collect();
    let net = Network::new(
        vec![Layer::from_dense(gamma + 1, 1, &w1, vec![anchor; gamma + 1])?, Layer::from_dense(1, gamma + 1, &w2, vec![0.0])?],
        act,
    )?;
    Ok(SmoothMonomial { net, anchor, scale, derivative_bound: m, bound: c / scale })
}
