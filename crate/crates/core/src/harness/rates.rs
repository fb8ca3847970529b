//! Closed-form rate exponents, regime flags and entropy calculators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Squared-error exponents `e` (rates `n^{-e}`) and regime flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalRates {
    pub alpha: f64,
    pub beta: f64,
    pub dim: usize,
    /// `min(2β/(2β+D), α/(α+D-1))`.
    pub dnn: f64,
    /// Lower-bound exponent of linear estimators, `α/(2α+D-1)`.
    pub linear: f64,
    /// Wavelet floor `1/2`.
    pub wavelet: f64,
    /// Curvelet floor `1/3`.
    pub curvelet: f64,
    /// `β > D/2` and `α > D-1`.
    pub wavelet_floor_active: bool,
    /// `D = 2`, `β > D/4` and `α > (D-1)/2`.
    pub curvelet_floor_active: bool,
    /// `α < 2β(D-1)/D`.
    pub linear_suboptimal: bool,
    /// Which term of the DNN rate binds: `true` when the boundary term
    /// `α/(α+D-1)` is the smaller exponent.
    pub boundary_limited: bool,
}

impl TheoreticalRates {
    pub fn flags(&self) -> BTreeMap<&'static str, bool> {
        BTreeMap::from([
            ("wavelet_floor_active", self.wavelet_floor_active),
            ("curvelet_floor_active", self.curvelet_floor_active),
            ("linear_suboptimal", self.linear_suboptimal),
            ("boundary_limited", self.boundary_limited),
        ])
    }
}

pub fn theoretical_rates(alpha: f64, beta: f64, dim: usize) -> Result<TheoreticalRates> {
    if !(alpha >= 1.0 && beta >= 1.0) || dim < 2 {
        return invalid(format!("rates need α, β ≥ 1 and D ≥ 2, got α={alpha}, β={beta}, D={dim}"));
    }
    let d = dim as f64;
    let smooth = 2.0 * beta / (2.0 * beta + d);
    let boundary = alpha / (alpha + d - 1.0);
    Ok(TheoreticalRates {
        alpha,
        beta,
        dim,
        dnn: smooth.min(boundary),
        linear: alpha / (2.0 * alpha + d - 1.0),
        wavelet: 0.5,
        curvelet: 1.0 / 3.0,
        wavelet_floor_active: beta > d / 2.0 && alpha > d - 1.0,
        curvelet_floor_active: dim == 2 && beta > d / 4.0 && alpha > (d - 1.0) / 2.0,
        linear_suboptimal: alpha < 2.0 * beta * (d - 1.0) / d,
        boundary_limited: boundary < smooth,
    })
}

/// `S · ln(2 L B^L (S+1)^L / ε)`, evaluated in log form.
pub fn covering_bound(depth: usize, sparsity: usize, magnitude: f64, eps: f64) -> Result<f64> {
    if depth == 0 || sparsity == 0 || !(magnitude > 0.0) || !(eps > 0.0) {
        return invalid("covering bound needs L, S, B, ε > 0");
    }
    let l = depth as f64;
    let s = sparsity as f64;
    Ok(s * (2f64.ln() + l.ln() + l * magnitude.ln() + l * (s + 1.0).ln() - eps.ln()))
}

/// Order-of-magnitude packing count `ε^{-D/β} + ε^{-2α/(D-1)}`.
pub fn packing_rate(eps: f64, alpha: f64, beta: f64, dim: usize) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) || dim < 2 || !(alpha >= 2.0 && beta >= 2.0) {
        return invalid(format!("packing rate needs ε ∈ (0,1], D ≥ 2, α, β ≥ 2; got ε={eps}, α={alpha}, β={beta}, D={dim}"));
    }
    let d = dim as f64;
    Ok(eps.powf(-d / beta) + eps.powf(-2.0 * alpha / (d - 1.0)))
}
