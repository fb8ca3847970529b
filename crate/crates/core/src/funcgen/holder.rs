use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Domain, Target};
use crate::quad::halton;
use crate::rng::{stream_rng, Stream};

/// Closed-form member of a Hölder ball with an exact partial-derivative
/// oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFn {
    pub dim: usize,
    /// Smoothness the function is used at.
    pub beta: f64,
    /// Sup-norm radius.
    pub radius: f64,
    /// Highest derivative order the oracle answers.
    pub max_order: u32,
    pub family: Family,
}

/// Analytic families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `Σ c_k x^k` over multi-indices `k`.
    Polynomial { terms: Vec<(Vec<u32>, f64)> },
    /// `scale · Σ a_k Π_d cos(π k_d x_d)`.
    CosineSeries { scale: f64, terms: Vec<(Vec<u32>, f64)> },
    /// `offset + amplitude · sin(2π frequency x_axis + phase)`.
    Sine { offset: f64, amplitude: f64, frequency: f64, phase: f64, axis: usize },
    /// `offset + amplitude · Σ_{k<levels} 2^{-k} dist(2^k x_axis, ℤ)`, a
    /// truncated Takagi curve: Lipschitz with constant `levels·amplitude`
    /// but with fluctuations on every dyadic scale down to `2^{-levels}`.
    Takagi { offset: f64, amplitude: f64, levels: u32, axis: usize },
    /// Upper (`sign = 1`) or lower (`sign = -1`) half of a circle:
    /// `c_y + sign · sqrt(max(r² - (x - c_x)², 0))`.
    CircleArc { cx: f64, cy: f64, r: f64, sign: f64, axis: usize },
}

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn trig_derivative(cosine: bool, w: f64, x: f64, order: u32) -> f64 {
    // d^j/dx^j cos(wx + c) = w^j cos(wx + c + jπ/2)
    let shift = if cosine { 0.0 } else { -std::f64::consts::FRAC_PI_2 };
    let arg = w * x + shift + order as f64 * std::f64::consts::FRAC_PI_2;
    w.powi(order as i32) * arg.cos()
}

impl HolderFn {
    pub fn constant(dim: usize, c: f64) -> Self {
        HolderFn {
            dim,
            beta: 64.0,
            radius: c.abs(),
            max_order: 64,
            family: Family::Polynomial { terms: vec![(vec![0; dim], c)] },
        }
    }

    pub fn polynomial(dim: usize, beta: f64, terms: Vec<(Vec<u32>, f64)>) -> Self {
        let radius = terms.iter().map(|(_, c)| c.abs()).sum();
        HolderFn { dim, beta, radius, max_order: 64, family: Family::Polynomial { terms } }
    }

    /// `offset + amplitude · sin(2π frequency x_axis)`.
    pub fn sine(dim: usize, beta: f64, offset: f64, amplitude: f64, frequency: f64, axis: usize) -> Self {
        HolderFn {
            dim,
            beta,
            radius: offset.abs() + amplitude.abs(),
            max_order: 64,
            family: Family::Sine { offset, amplitude, frequency, phase: 0.0, axis },
        }
    }

    pub fn takagi(dim: usize, offset: f64, amplitude: f64, levels: u32, axis: usize) -> Self {
        HolderFn {
            dim,
            beta: 1.0,
            radius: offset.abs() + amplitude.abs(),
            max_order: 2,
            family: Family::Takagi { offset, amplitude, levels, axis },
        }
    }

    /// `Some(c)` when the function is identically `c`.
    pub fn as_constant(&self) -> Option<f64> {
        match &self.family {
            Family::Polynomial { terms } => {
                let mut c = 0.0;
                for (k, v) in terms {
                    if k.iter().all(|&e| e == 0) {
                        c += v;
                    } else if *v != 0.0 {
                        return None;
                    }
                }
                Some(c)
            }
            Family::CosineSeries { scale, terms } => {
                let mut c = 0.0;
                for (k, v) in terms {
                    if k.iter().all(|&e| e == 0) {
                        c += scale * v;
                    } else if *v != 0.0 && *scale != 0.0 {
                        return None;
                    }
                }
                Some(c)
            }
            Family::Sine { offset, amplitude, .. } if *amplitude == 0.0 => Some(*offset),
            Family::Takagi { offset, amplitude, levels, .. } if *amplitude == 0.0 || *levels == 0 => Some(*offset),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.partial(&vec![0; self.dim], x).expect("order-0 evaluation is always available")
    }

    /// Mixed partial derivative `∂^k f(x)`; `None` beyond the oracle's order.
    pub fn partial(&self, k: &[u32], x: &[f64]) -> Option<f64> {
        debug_assert_eq!(k.len(), self.dim);
        debug_assert_eq!(x.len(), self.dim);
        let order: u32 = k.iter().sum();
        if order > self.max_order {
            return None;
        }
        let v = match &self.family {
            Family::Polynomial { terms } => terms
                .iter()
                .map(|(e, c)| {
                    let mut v = *c;
                    for d in 0..self.dim {
                        if k[d] > e[d] {
                            return 0.0;
                        }
                        v *= falling(e[d], k[d]) * x[d].powi((e[d] - k[d]) as i32);
                    }
                    v
                })
                .sum(),
            Family::CosineSeries { scale, terms } => {
                scale
                    * terms
                        .iter()
                        .map(|(n, a)| {
                            let mut v = *a;
                            for d in 0..self.dim {
                                v *= trig_derivative(true, std::f64::consts::PI * n[d] as f64, x[d], k[d]);
                            }
                            v
                        })
                        .sum::<f64>()
            }
            Family::Sine { offset, amplitude, frequency, phase, axis } => {
                if k.iter().enumerate().any(|(d, &o)| d != *axis && o > 0) {
                    return Some(0.0);
                }
                let w = 2.0 * std::f64::consts::PI * frequency;
                let j = k[*axis];
                let s = amplitude * trig_derivative(false, w, x[*axis] + phase / w, j);
                if j == 0 {
                    offset + s
                } else {
                    s
                }
            }
            Family::Takagi { offset, amplitude, levels, axis } => {
                if k.iter().enumerate().any(|(d, &o)| d != *axis && o > 0) {
                    return Some(0.0);
                }
                let t = x[*axis];
                match k[*axis] {
                    0 => {
                        offset
                            + amplitude
                                * (0..*levels)
                                    .map(|l| {
                                        let y = t * (1u64 << l) as f64;
                                        (y - y.round()).abs() / (1u64 << l) as f64
                                    })
                                    .sum::<f64>()
                    }
                    1 => {
                        amplitude
                            * (0..*levels)
                                .map(|l| {
                                    let y = t * (1u64 << l) as f64;
                                    if y - y.floor() < 0.5 {
                                        1.0
                                    } else {
                                        -1.0
                                    }
                                })
                                .sum::<f64>()
                    }
                    _ => 0.0,
                }
            }
            Family::CircleArc { cx, cy, r, sign, axis } => {
                if k.iter().enumerate().any(|(d, &o)| d != *axis && o > 0) {
                    return Some(0.0);
                }
                let u = x[*axis] - cx;
                let q = r * r - u * u;
                match k[*axis] {
                    0 => cy + sign * q.max(0.0).sqrt(),
                    1 => {
                        if q > 0.0 {
                            -sign * u / q.sqrt()
                        } else {
                            0.0
                        }
                    }
                    _ => return None,
                }
            }
        };
        Some(v)
    }

    /// `max |f|` over a fixed `n`-point Halton probe of the unit cube.
    pub fn probe_sup(&self, n: usize) -> f64 {
        if self.dim == 0 {
            return self.eval(&[]).abs();
        }
        halton(n, self.dim).chunks(self.dim).map(|p| self.eval(p).abs()).fold(0.0, f64::max)
    }

    pub fn describe(&self) -> String {
        match &self.family {
            Family::Polynomial { terms } => format!("polynomial({} terms, D={})", terms.len(), self.dim),
            Family::CosineSeries { terms, .. } => format!("cosine-series({} terms, D={}, beta={})", terms.len(), self.dim, self.beta),
            Family::Sine { offset, amplitude, frequency, .. } => format!("sine({offset}+{amplitude}sin(2pi {frequency} x))"),
            Family::Takagi { offset, amplitude, levels, .. } => format!("takagi({offset}+{amplitude}T_{levels}(x))"),
            Family::CircleArc { cx, cy, r, sign, .. } => format!("circle-arc(({cx},{cy}),r={r},sign={sign})"),
        }
    }
}

impl Target for HolderFn {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        HolderFn::eval(self, x)
    }
    fn domain(&self) -> Domain {
        Domain::UnitCube
    }
    fn describe(&self) -> String {
        HolderFn::describe(self)
    }
}

/// Number of cosine frequencies per axis minus one.
pub const COSINE_K: u32 = 8;
/// Probe size for sup-norm normalization.
pub const PROBE: usize = 10_000;

/// Draws a random cosine series in `H^β_F(I^D)`: coefficients uniform on
/// `[-1, 1]` damped by `(1 + ‖k‖₂)^{-(β + D/2 + 1)}`, normalized so the
/// probe sup norm equals `F`.
pub fn sample_holder(seed: u64, beta: f64, radius: f64, dim: usize) -> HolderFn {
    let mut rng = stream_rng(seed, Stream::Coefficients);
    let mut terms = Vec::new();
    let total = (COSINE_K + 1).pow(dim as u32);
    for idx in 0..total {
        let mut k = Vec::with_capacity(dim);
        let mut r = idx;
        for _ in 0..dim {
            k.push(r % (COSINE_K + 1));
            r /= COSINE_K + 1;
        }
        let norm = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
        let a = rng.random_range(-1.0..1.0) * (1.0 + norm).powf(-(beta + dim as f64 / 2.0 + 1.0));
        terms.push((k, a));
    }
    cosine_series(dim, beta, radius, terms)
}

/// Cosine series with coefficient table `terms`, rescaled so the probe sup
/// norm equals `radius` (an all-zero table stays zero).
pub fn cosine_series(dim: usize, beta: f64, radius: f64, terms: Vec<(Vec<u32>, f64)>) -> HolderFn {
    let mut f = HolderFn {
        dim,
        beta,
        radius,
        max_order: beta.floor() as u32 + 1,
        family: Family::CosineSeries { scale: 1.0, terms },
    };
    let z = f.probe_sup(PROBE);
    if let Family::CosineSeries { scale, .. } = &mut f.family {
        *scale = if z > 0.0 { radius / z } else { 1.0 };
    }
    f
}
