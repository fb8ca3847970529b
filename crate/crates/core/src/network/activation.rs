use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Highest derivative order the analytic oracles support. Condition-(i)
/// activations therefore carry a derivative budget `N = MAX_DERIVATIVE - 1`.
pub const MAX_DERIVATIVE: usize = 12;

/// Smoothness class of an activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Smooth, with polynomial (degree `k`) or constant tails.
    Smooth,
    /// Two-slope piecewise linear through the origin.
    PiecewiseLinear,
}

/// Element-wise nonlinearity shared by every hidden layer of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Activation {
    Sigmoid,
    SoftPlus,
    Swish,
    ReLU,
    /// `x` for `x >= 0`, `slope * x` otherwise.
    LeakyReLU { slope: f64 },
    /// `c1 * x` for `x >= 0`, `c2 * x` otherwise.
    AffinePiecewise { c1: f64, c2: f64 },
}

impl Activation {
    pub fn leaky(slope: f64) -> Result<Self> {
        let a = Activation::LeakyReLU { slope };
        a.validate()?;
        Ok(a)
    }

    pub fn affine_piecewise(c1: f64, c2: f64) -> Result<Self> {
        let a = Activation::AffinePiecewise { c1, c2 };
        a.validate()?;
        Ok(a)
    }

    /// Checks `c1 > c2 >= 0` for the piecewise-linear kinds.
    pub fn validate(&self) -> Result<()> {
        if let Some((c1, c2)) = self.slopes() {
            if !(c1.is_finite() && c2.is_finite() && c1 > c2 && c2 >= 0.0) {
                return invalid(format!("slopes must satisfy c1 > c2 >= 0, got c1={c1}, c2={c2}"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            Activation::Sigmoid => "sigmoid".into(),
            Activation::SoftPlus => "softplus".into(),
            Activation::Swish => "swish".into(),
            Activation::ReLU => "relu".into(),
            Activation::LeakyReLU { slope } => format!("leaky-relu({slope})"),
            Activation::AffinePiecewise { c1, c2 } => format!("affine-piecewise({c1},{c2})"),
        }
    }

    /// Parses `relu`, `leaky-relu[:slope]`, `sigmoid`, `softplus`, `swish`,
    /// `affine-piecewise:c1:c2`.
    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let mut parts = lower.split([':', ',', '(', ')']).filter(|p| !p.is_empty());
        let head = parts.next().unwrap_or("");
        let nums: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| crate::Error::Parse(format!("bad activation parameters in '{s}'")))?;
        let act = match (head, nums.as_slice()) {
            ("relu", []) => Activation::ReLU,
            ("leaky-relu" | "leakyrelu" | "leaky", []) => Activation::LeakyReLU { slope: 0.2 },
            ("leaky-relu" | "leakyrelu" | "leaky", [s]) => Activation::LeakyReLU { slope: *s },
            ("affine-piecewise" | "affine", [c1, c2]) => Activation::AffinePiecewise { c1: *c1, c2: *c2 },
            ("sigmoid", []) => Activation::Sigmoid,
            ("softplus", []) => Activation::SoftPlus,
            ("swish", []) => Activation::Swish,
            _ => return Err(crate::Error::Parse(format!("unknown activation '{s}'"))),
        };
        act.validate()?;
        Ok(act)
    }

    pub fn condition(&self) -> Condition {
        match self {
            Activation::Sigmoid | Activation::SoftPlus | Activation::Swish => Condition::Smooth,
            _ => Condition::PiecewiseLinear,
        }
    }

    pub fn is_piecewise_linear(&self) -> bool {
        self.condition() == Condition::PiecewiseLinear
    }

    /// `(c1, c2)` for piecewise-linear kinds.
    pub fn slopes(&self) -> Option<(f64, f64)> {
        match *self {
            Activation::ReLU => Some((1.0, 0.0)),
            Activation::LeakyReLU { slope } => Some((1.0, slope)),
            Activation::AffinePiecewise { c1, c2 } => Some((c1, c2)),
            _ => None,
        }
    }

    /// Degree `k` of the right-tail polynomial (smooth kinds only).
    pub fn tail_degree(&self) -> Option<u32> {
        match self {
            Activation::Sigmoid => Some(0),
            Activation::SoftPlus | Activation::Swish => Some(1),
            _ => None,
        }
    }

    /// Tail decay order `q`. All three smooth kinds approach their limits
    /// exponentially fast, so every finite `q` holds.
    pub fn tail_order(&self) -> Option<f64> {
        match self.condition() {
            Condition::Smooth => Some(f64::INFINITY),
            Condition::PiecewiseLinear => None,
        }
    }

    /// Derivative budget `N`: derivatives up to `N + 1` are available.
    pub fn derivative_budget(&self) -> Option<usize> {
        match self.condition() {
            Condition::Smooth => Some(MAX_DERIVATIVE - 1),
            Condition::PiecewiseLinear => None,
        }
    }

    /// Limits `(c_lower, c_upper)` of the tails: `η(x) → c_lower` as
    /// `x → -∞` and `η(x) - c_upper x^k → 0` as `x → ∞`.
    pub fn tail_limits(&self) -> Option<(f64, f64)> {
        match self {
            Activation::Sigmoid | Activation::SoftPlus | Activation::Swish => Some((0.0, 1.0)),
            _ => None,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::ReLU => {
                if x >= 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::LeakyReLU { slope } => {
                if x >= 0.0 {
                    x
                } else {
                    slope * x
                }
            }
            Activation::AffinePiecewise { c1, c2 } => {
                if x >= 0.0 {
                    c1 * x
                } else {
                    c2 * x
                }
            }
            Activation::Sigmoid => sigmoid(x),
            Activation::SoftPlus => softplus(x),
            Activation::Swish => x * sigmoid(x),
        }
    }

    /// First derivative (right derivative at the kink for piecewise kinds).
    #[inline]
    pub fn grad(&self, x: f64) -> f64 {
        match *self {
            Activation::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyReLU { slope } => {
                if x > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
            Activation::AffinePiecewise { c1, c2 } => {
                if x > 0.0 {
                    c1
                } else {
                    c2
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::SoftPlus => sigmoid(x),
            Activation::Swish => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
        }
    }

    /// `n`-th derivative for `n <= MAX_DERIVATIVE`. Piecewise kinds return
    /// the one-sided slope for `n = 1` and zero beyond.
    pub fn derivative(&self, n: usize, x: f64) -> f64 {
        assert!(n <= MAX_DERIVATIVE, "derivative order {n} exceeds {MAX_DERIVATIVE}");
        match self {
            Activation::Sigmoid => sigmoid_derivative(n, x),
            Activation::SoftPlus => {
                if n == 0 {
                    softplus(x)
                } else {
                    sigmoid_derivative(n - 1, x)
                }
            }
            Activation::Swish => {
                if n == 0 {
                    x * sigmoid(x)
                } else {
                    x * sigmoid_derivative(n, x) + n as f64 * sigmoid_derivative(n - 1, x)
                }
            }
            _ => match n {
                0 => self.apply(x),
                1 => self.grad(x),
                _ => 0.0,
            },
        }
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Coefficients (ascending) of the polynomial `P_n` with `σ^{(n)} = P_n(σ)`.
fn sigmoid_poly(n: usize) -> Vec<f64> {
    // P_0(s) = s, P_{n+1}(s) = P_n'(s) (s - s^2)
    let mut p = vec![0.0, 1.0];
    for _ in 0..n {
        let dp: Vec<f64> = (1..p.len()).map(|i| i as f64 * p[i]).collect();
        let mut next = vec![0.0; dp.len() + 2];
        for (i, c) in dp.iter().enumerate() {
            next[i + 1] += c;
            next[i + 2] -= c;
        }
        p = next;
    }
    p
}

fn sigmoid_derivative(n: usize, x: f64) -> f64 {
    let s = sigmoid(x);
    if n == 0 {
        return s;
    }
    // For x > 0 evaluate through the mirror identity σ(-x) = 1 - σ(x) to keep
    // the small factor accurate: σ^{(n)}(x) = (-1)^{n+1} σ^{(n)}(-x).
    if x > 0.0 {
        let v = sigmoid_derivative(n, -x);
        return if n % 2 == 1 { v } else { -v };
    }
    sigmoid_poly(n).iter().rev().fold(0.0, |acc, c| acc * s + c)
}
