//! Saw-tooth squaring, multiplication and iterated products.

use super::{require_piecewise_linear, Built};
use crate::error::{invalid, Result};
use crate::network::{compose, compose_all, parallel, parallel_disjoint, Activation, Layer, Network};

/// Output coefficients `(a, b, c)` with `g_w(x) = a η(x) + b η(x - 1/2) + c`
/// for `x ∈ [0, 1]`.
fn teeth_coefficients(c1: f64, c2: f64) -> (f64, f64, f64) {
    let d = c1 - c2;
    ((2.0 * c1 + 2.0 * c2) / (c1 * d), -4.0 / d, -2.0 * c2 / d)
}

/// The tooth `g_w(x) = 2x` on `[0, 1/2]`, `2 - 2x` on `[1/2, 1]`.
pub fn teeth_net(act: Activation) -> Result<Network> {
    let (c1, c2) = require_piecewise_linear(act, "teeth")?;
    let (a, b, c) = teeth_coefficients(c1, c2);
    Network::new(
        vec![
            Layer::from_dense(2, 1, &[1.0, 1.0], vec![0.0, -0.5])?,
            Layer::from_dense(1, 2, &[a, b], vec![c])?,
        ],
        act,
    )
}

/// `t`-fold composition of the tooth: `2^{t-1}` teeth on `[0, 1]`.
pub fn sawtooth_net(t: usize, act: Activation) -> Result<Network> {
    if t == 0 {
        return invalid("saw-tooth order t must be positive");
    }
    let w = teeth_net(act)?;
    let mut g = w.clone();
    for _ in 1..t {
        g = compose(&w, &g)?;
    }
    Ok(g)
}

/// Closed form of the order-`t` saw-tooth on `[0, 1]`.
pub fn sawtooth_closed_form(t: usize, x: f64) -> f64 {
    let y = x * (1u64 << (t - 1)) as f64;
    let f = y - y.floor();
    2.0 * f.min(1.0 - f)
}

/// `g_m(x) = x - Σ_{t=1}^m g_t(x) / 4^t`, within `2^{-2-2m}` of `x²` on
/// `[0, 1]`.
///
/// Hidden layer `t` holds `(η(g_{t-1}), η(g_{t-1} - 1/2), η(r_{t-1}))`
/// where `r_t = x - Σ_{s≤t} g_s/4^s`. Both `g_t` and `r_t` stay
/// non-negative on `[0, 1]`, so they pass through the activation linearly.
pub fn square_net(m: usize, act: Activation) -> Result<Network> {
    let (c1, c2) = require_piecewise_linear(act, "square")?;
    if m == 0 {
        return invalid("square_net needs m >= 1");
    }
    let (a, b, c) = teeth_coefficients(c1, c2);
    let mut layers = Vec::with_capacity(m + 1);
    layers.push(Layer::from_dense(3, 1, &[1.0, 1.0, 1.0], vec![0.0, -0.5, 0.0])?);
    for t in 1..m {
        // pre-activations (g_t, g_t - 1/2, r_t) from (u1, u2, u3)
        let q = 0.25f64.powi(t as i32);
        let w = [a, b, 0.0, a, b, 0.0, -q * a, -q * b, 1.0 / c1];
        layers.push(Layer::from_dense(3, 3, &w, vec![c, c - 0.5, -q * c])?);
    }
    let q = 0.25f64.powi(m as i32);
    layers.push(Layer::from_dense(1, 3, &[-q * a, -q * b, 1.0 / c1], vec![-q * c])?);
    Network::new(layers, act)
}

/// Sup-norm error bound of [`square_net`] on `[0, 1]`.
pub fn square_bound(m: usize) -> f64 {
    0.25f64.powi(m as i32 + 1)
}

/// `(x, y) ↦ (|z₊|, |z₋|)` with `z± = (x/A ± y/B)/2`, using
/// `|z| = (η(z) + η(-z)) / (c1 - c2)`.
fn polar_abs(a: f64, b: f64, act: Activation) -> Result<Network> {
    let (c1, c2) = require_piecewise_linear(act, "mult")?;
    let (p, q) = (0.5 / a, 0.5 / b);
    let s = 1.0 / (c1 - c2);
    Network::new(
        vec![
            Layer::from_dense(4, 2, &[p, q, -p, -q, p, -q, -p, q], vec![0.0; 4])?,
            Layer::from_dense(2, 4, &[s, s, 0.0, 0.0, 0.0, 0.0, s, s], vec![0.0; 2])?,
        ],
        act,
    )
}

/// Multiplier for `x ∈ [-A, A]`, `y ∈ [-B, B]` through the polarization
/// `xy = AB [((x/A + y/B)/2)² - ((x/A - y/B)/2)²]`, each square by
/// [`square_net`] on `[0, 1]`. Sup error `AB · 2^{-2-2m}`; zero up to
/// rounding whenever `y = 0`.
pub fn mult_asym_net(m: usize, a: f64, b: f64, act: Activation) -> Result<Network> {
    if !(a > 0.0 && b > 0.0) {
        return invalid("multiplier ranges must be positive");
    }
    let sq = square_net(m, act)?;
    let both = parallel_disjoint(&[&sq, &sq])?;
    let head = Network::affine(1, 2, &[a * b, -a * b], vec![0.0], act)?;
    compose_all(&[&head, &both, &polar_abs(a, b, act)?])
}

/// Two-input multiplier on `[-T, T]²` with sup error `T² 2^{-2-2m}`
/// (inside the `T² 2^{-2m}` budget).
pub fn mult_net(m: usize, t: f64, act: Activation) -> Result<Network> {
    mult_asym_net(m, t, t, act)
}

pub fn mult_bound(m: usize, t: f64) -> f64 {
    t * t * 0.25f64.powi(m as i32 + 1)
}

/// Iterated product `g_{c,k}(x) = g_c(g_{c,k-1}(x_{1..k-1}), x_k)` for
/// inputs with `|x_i| ≤ ranges[i]`. Each stage uses an asymmetric
/// multiplier sized to the running product's range plus its accumulated
/// error. Returns the network with its sup-error bound and output range.
pub fn product_net(ranges: &[f64], m: usize, act: Activation) -> Result<Built> {
    let k = ranges.len();
    if k == 0 {
        return invalid("product of no factors");
    }
    if ranges.iter().any(|r| !(*r > 0.0)) {
        return invalid("factor ranges must be positive");
    }
    let mut net = Network::select(k, &[0], act)?;
    let mut err = 0.0;
    let mut range = ranges[0];
    for i in 1..k {
        let a = range + err;
        let b = ranges[i];
        let mult = mult_asym_net(m, a, b, act)?;
        let xi = Network::select(k, &[i], act)?;
        let pair = parallel(&[&net, &xi])?;
        net = compose(&mult, &pair)?;
        err = a * b * 0.25f64.powi(m as i32 + 1) + b * err;
        range *= b;
    }
    Ok(Built { net, error: err, range: range + err })
}

/// Error recursion of [`product_net`] without building it.
pub fn product_bound(ranges: &[f64], m: usize) -> f64 {
    let mut err = 0.0;
    let mut range = ranges[0];
    for &b in &ranges[1..] {
        err = (range + err) * b * 0.25f64.powi(m as i32 + 1) + b * err;
        range *= b;
    }
    err
}

/// Smallest `m` with `product_bound(ranges, m) ≤ eps` (capped at 60).
pub fn product_depth_for(ranges: &[f64], eps: f64) -> usize {
    (1..=60).find(|&m| product_bound(ranges, m) <= eps).unwrap_or(60)
}

/// Smallest `m` with `A B 2^{-2-2m} ≤ eps` (capped at 60).
pub fn mult_depth_for(a: f64, b: f64, eps: f64) -> usize {
    product_depth_for(&[a, b], eps)
}

/// `D′`-input multiplier on `[-T, T]^{D′}`.
pub fn multi_mult_net(m: usize, t: f64, d: usize, act: Activation) -> Result<Network> {
    if d < 2 {
        return invalid("multi_mult_net needs D' >= 2");
    }
    Ok(product_net(&vec![t; d], m, act)?.net)
}

/// Stated sup-error budget `D′ T² 2^{-2m}` of [`multi_mult_net`].
pub fn multi_mult_budget(m: usize, t: f64, d: usize) -> f64 {
    d as f64 * t * t * 0.25f64.powi(m as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ACTS: [Activation; 3] = [Activation::ReLU, Activation::LeakyReLU { slope: 0.2 }, Activation::AffinePiecewise { c1: 2.0, c2: 0.5 }];

    #[test]
    fn teeth_values() {
        for act in ACTS {
            let g = teeth_net(act).unwrap();
            assert!((g.eval1(&[0.25]).unwrap() - 0.5).abs() < 1e-15);
            assert!((g.eval1(&[0.5]).unwrap() - 1.0).abs() < 1e-15);
            assert!(g.eval1(&[1.0]).unwrap().abs() < 1e-15);
            let s = g.metrics();
            assert_eq!(s.depth, 2);
            assert!(s.sparsity <= 6);
        }
        assert_eq!(teeth_net(Activation::ReLU).unwrap().metrics().sparsity, 5);
        assert!(teeth_net(Activation::Sigmoid).is_err());
    }

    #[test]
    fn sawtooth_examples() {
        let g2 = sawtooth_net(2, Activation::ReLU).unwrap();
        assert!((g2.eval1(&[0.125]).unwrap() - 0.5).abs() < 1e-15);
        let g3 = sawtooth_net(3, Activation::ReLU).unwrap();
        for k in 0..=4 {
            assert!(g3.eval1(&[2.0 * k as f64 / 8.0]).unwrap().abs() < 1e-15);
        }
        let g4 = sawtooth_net(4, Activation::LeakyReLU { slope: 0.2 }).unwrap();
        let max = (0..=4096).map(|i| g4.eval1(&[i as f64 / 4096.0]).unwrap()).fold(f64::MIN, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        assert_eq!(g4.depth(), 5);
    }

    #[test]
    fn square_anchors_and_bounds() {
        for act in ACTS {
            for m in 1..=8 {
                let g = square_net(m, act).unwrap();
                assert!(g.eval1(&[0.0]).unwrap().abs() < 1e-14);
                assert!((g.eval1(&[1.0]).unwrap() - 1.0).abs() < 1e-14);
            }
            let g3 = square_net(3, act).unwrap();
            let sup = (0..=4096).map(|i| i as f64 / 4096.0).map(|x| (g3.eval1(&[x]).unwrap() - x * x).abs()).fold(0.0, f64::max);
            assert!(sup <= 0.25f64.powi(4) + 1e-15, "{sup}");
        }
        let g6 = square_net(6, Activation::ReLU).unwrap();
        assert!((g6.eval1(&[0.5]).unwrap() - 0.25).abs() <= 2f64.powi(-14));
    }

    #[test]
    fn mult_examples() {
        let g = mult_net(4, 1.0, Activation::ReLU).unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..=200 {
            for j in 0..=200 {
                let (x, y) = (-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0);
                sup = sup.max((g.eval1(&[x, y]).unwrap() - x * y).abs());
            }
        }
        assert!(sup <= 2f64.powi(-8));
        let g = mult_net(6, 3.0, Activation::ReLU).unwrap();
        assert!((g.eval1(&[2.0, -1.5]).unwrap() + 3.0).abs() <= 9.0 * 2f64.powi(-12));
        for act in ACTS {
            let g = mult_net(5, 2.0, act).unwrap();
            for i in 0..=40 {
                let u = -2.0 + i as f64 / 10.0;
                assert!(g.eval1(&[u, 0.0]).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multi_mult_base_case_is_mult() {
        let a = multi_mult_net(4, 1.5, 2, Activation::ReLU).unwrap();
        let b = mult_net(4, 1.5, Activation::ReLU).unwrap();
        for i in 0..=30 {
            for j in 0..=30 {
                let p = [-1.5 + 0.1 * i as f64, -1.5 + 0.1 * j as f64];
                assert!((a.eval1(&p).unwrap() - b.eval1(&p).unwrap()).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn multi_mult_three_factors() {
        let g = multi_mult_net(5, 1.0, 3, Activation::ReLU).unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..=40 {
            for j in 0..=40 {
                for k in 0..=40 {
                    let p = [-1.0 + i as f64 / 20.0, -1.0 + j as f64 / 20.0, -1.0 + k as f64 / 20.0];
                    sup = sup.max((g.eval1(&p).unwrap() - p[0] * p[1] * p[2]).abs());
                }
            }
        }
        assert!(sup <= 3.0 * 2f64.powi(-10), "{sup}");
        assert!(g.eval1(&[0.3, 0.0, -0.7]).unwrap().abs() <= 3.0 * 2f64.powi(-10));
    }
}
