//! Local Taylor approximation of Hölder functions on a grid of cubes.

use std::collections::BTreeMap;

use super::basic::{mult_asym_net, mult_depth_for, product_depth_for, product_net};
use super::monomial::monomial_built;
use super::step::step_net;
use super::{l2_error_box, require_piecewise_linear, ApproxReport, Built, ErrorNorm};
use crate::error::{invalid, Error, Result};
use crate::funcgen::HolderFn;
use crate::network::{affine_output, compose, parallel, precompose_affine, Activation, Network};

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_D, hi_D]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn unit(dim: usize) -> Self {
        Region { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn validate(&self) -> Result<()> {
        if self.lo.len() != self.hi.len() || self.lo.iter().zip(&self.hi).any(|(a, b)| !(a < b)) {
            return invalid("region needs lo < hi on every axis");
        }
        Ok(())
    }
}

/// Data recorded by [`smooth_build`].
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothParams {
    pub cubes_per_axis: usize,
    pub degree: usize,
    /// Accuracy of every inner monomial and multiplier.
    pub inner_eps: f64,
    /// Largest Taylor-polynomial range `T_λ` over the cubes.
    pub max_poly_range: f64,
    /// Sup-norm bound on the network's output over the region.
    pub range: f64,
}

/// Constant network with `dim` inputs.
pub(crate) fn constant_net(dim: usize, c: f64, act: Activation) -> Result<Network> {
    Network::affine(1, dim, &vec![0.0; dim], vec![c], act)
}

/// Approximate indicator of the box with optional sides: a missing `lo[d]`
/// or `hi[d]` leaves that side open. Each bounded axis contributes
/// `g_s(s_d(x_d - lo_d)) + g_s(s_d(hi_d - x_d)) - 1` and the axis factors
/// are multiplied with [`product_net`] to accuracy `eps`. Values lie in
/// `[0, 1 + error]`.
pub fn box_indicator_net(lo: &[Option<f64>], hi: &[Option<f64>], scale: &[f64], eps: f64, act: Activation) -> Result<Built> {
    require_piecewise_linear(act, "box indicator")?;
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("indicator accuracy must lie in (0,1), got {eps}"));
    }
    let dim = lo.len();
    if hi.len() != dim || scale.len() != dim {
        return invalid("box bounds and scales must have the same length");
    }
    let g = step_net(eps, 1.0, act)?;
    let mut factors = Vec::new();
    for d in 0..dim {
        let mut sides = Vec::new();
        if let Some(l) = lo[d] {
            sides.push(precompose_affine(&g, dim, vec![(0, d, scale[d])], vec![-scale[d] * l])?);
        }
        if let Some(h) = hi[d] {
            sides.push(precompose_affine(&g, dim, vec![(0, d, -scale[d])], vec![scale[d] * h])?);
        }
        match sides.len() {
            0 => {}
            1 => factors.push(sides.pop().unwrap()),
            _ => factors.push(affine_output(&parallel(&[&sides[0], &sides[1]])?, &[1.0, 1.0], -1.0)?),
        }
    }
    match factors.len() {
        0 => Ok(Built { net: constant_net(dim, 1.0, act)?, error: 0.0, range: 1.0 }),
        1 => Ok(Built { net: factors.pop().unwrap(), error: 0.0, range: 1.0 }),
        k => {
            let ranges = vec![1.0; k];
            let m = product_depth_for(&ranges, eps);
            let prod = product_net(&ranges, m, act)?;
            let refs: Vec<&Network> = factors.iter().collect();
            Ok(Built { net: compose(&prod.net, &parallel(&refs)?)?, error: prod.error, range: prod.range })
        }
    }
}

/// Approximate indicator of the closed cube with the given center and side.
pub fn cube_indicator_net(center: &[f64], side: f64, eps: f64, act: Activation) -> Result<Network> {
    if !(side > 0.0) {
        return invalid("cube side must be positive");
    }
    let lo: Vec<Option<f64>> = center.iter().map(|c| Some(c - side / 2.0)).collect();
    let hi: Vec<Option<f64>> = center.iter().map(|c| Some(c + side / 2.0)).collect();
    Ok(box_indicator_net(&lo, &hi, &vec![1.0 / side; center.len()], eps, act)?.net)
}

/// All multi-indices of `dim` components with total order `≤ p`, in
/// graded lexicographic order.
fn multi_indices(dim: usize, p: usize) -> Vec<Vec<u32>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == dim {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur.push(e as u32);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, p, &mut Vec::new(), &mut out);
    out.sort_by_key(|k| (k.iter().sum::<u32>(), std::cmp::Reverse(k.clone())));
    out
}

fn factorial(k: &[u32]) -> f64 {
    k.iter().map(|&e| (1..=e).map(f64::from).product::<f64>()).product()
}

/// Network for `u^k` with `u = x - c`, `|u_d| ≤ r_d`; returns it with its
/// error and range.
fn taylor_term(k: &[u32], c: &[f64], r: &[f64], eps: f64, act: Activation) -> Result<Built> {
    let dim = k.len();
    let mut factors = Vec::new();
    for d in 0..dim {
        if k[d] == 0 {
            continue;
        }
        let mono = monomial_built(k[d] as usize, eps, r[d], act)?;
        let net = precompose_affine(&mono.net, dim, vec![(0, d, 1.0)], vec![-c[d]])?;
        factors.push(Built { net, error: mono.error, range: mono.range });
    }
    if factors.len() == 1 {
        return Ok(factors.pop().unwrap());
    }
    let ranges: Vec<f64> = factors.iter().map(|f| f.range).collect();
    let m = product_depth_for(&ranges, eps);
    let prod = product_net(&ranges, m, act)?;
    // propagated factor errors: Σ_i e_i Π_{j≠i} R_j
    let spread: f64 = (0..factors.len())
        .map(|i| factors[i].error * factors.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, f)| f.range).product::<f64>())
        .sum();
    let refs: Vec<&Network> = factors.iter().map(|f| &f.net).collect();
    Ok(Built { net: compose(&prod.net, &parallel(&refs)?)?, error: prod.error + spread, range: prod.range + spread })
}

/// The grid-of-cubes network without measuring its error.
///
/// `ℓ = ⌈δ^{-1/β}⌉` cubes per axis. On cube `λ` the Taylor polynomial
/// `P_λ` of `f` at the cube's center, of the largest degree below `β`, is
/// multiplied by an approximate cube indicator `g_λ`, and the products are
/// summed. Inner monomials and multipliers run at accuracy `δ²`. Indicator
/// ramps are matched across neighbouring cubes, so the `g_λ` form an exact
/// partition of unity over the region; cubes on the region's boundary stay
/// open outward.
pub fn smooth_build(f: &HolderFn, beta: f64, delta: f64, region: &Region, act: Activation) -> Result<(Built, SmoothParams)> {
    require_piecewise_linear(act, "smooth-function")?;
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("smooth accuracy δ must lie in (0,1), got {delta}"));
    }
    if !(beta > 0.0) {
        return invalid("smoothness β must be positive");
    }
    region.validate()?;
    let dim = f.dim;
    if region.dim() != dim {
        return Err(Error::InputShape { expected: dim, got: region.dim() });
    }
    let order = beta.floor() as usize;
    if (f.max_order as usize) < order {
        return Err(Error::InvalidParameter(format!(
            "derivative oracle answers up to order {} but smoothness {beta} needs order {order}",
            f.max_order
        )));
    }
    // largest integer strictly below β: the remainder is then O(side^β)
    let p = beta.ceil() as usize - 1;
    if let Some(c) = f.as_constant() {
        let net = constant_net(dim, c, act)?;
        let params = SmoothParams { cubes_per_axis: 1, degree: 0, inner_eps: 0.0, max_poly_range: c.abs(), range: c.abs() };
        return Ok((Built { net, error: 0.0, range: c.abs() }, params));
    }
    let ell = delta.powf(-1.0 / beta).ceil().max(1.0) as usize;
    let inner = delta * delta;
    let side: Vec<f64> = (0..dim).map(|d| (region.hi[d] - region.lo[d]) / ell as f64).collect();
    let scale: Vec<f64> = side.iter().map(|s| 1.0 / s).collect();
    let indices = multi_indices(dim, p);

    let mut cube_nets = Vec::new();
    let mut out_range: f64 = 0.0;
    let mut max_poly: f64 = 0.0;
    let total = ell.pow(dim as u32);
    for flat in 0..total {
        let mut r = flat;
        let mut idx = vec![0usize; dim];
        for v in idx.iter_mut() {
            *v = r % ell;
            r /= ell;
        }
        let center: Vec<f64> = (0..dim).map(|d| region.lo[d] + (idx[d] as f64 + 0.5) * side[d]).collect();
        let lo: Vec<Option<f64>> = (0..dim).map(|d| (idx[d] > 0).then(|| region.lo[d] + idx[d] as f64 * side[d])).collect();
        let hi: Vec<Option<f64>> =
            (0..dim).map(|d| (idx[d] + 1 < ell).then(|| region.lo[d] + (idx[d] + 1) as f64 * side[d])).collect();
        let ind = box_indicator_net(&lo, &hi, &scale, delta, act)?;

        let mut c0 = 0.0;
        let mut terms = Vec::new();
        let mut coefs = Vec::new();
        let mut poly_range = 0.0;
        for k in &indices {
            let v = f.partial(k, &center).expect("order checked above") / factorial(k);
            if v == 0.0 {
                continue;
            }
            if k.iter().all(|&e| e == 0) {
                c0 = v;
                poly_range += v.abs();
                continue;
            }
            let t = taylor_term(k, &center, &side, inner, act)?;
            poly_range += v.abs() * t.range;
            coefs.push(v);
            terms.push(t.net);
        }
        if poly_range == 0.0 {
            continue;
        }
        max_poly = max_poly.max(poly_range);
        out_range = out_range.max(poly_range * ind.range);
        let cube = if terms.is_empty() {
            affine_output(&ind.net, &[c0], 0.0)?
        } else {
            let refs: Vec<&Network> = terms.iter().collect();
            let poly = affine_output(&parallel(&refs)?, &coefs, c0)?;
            let m = mult_depth_for(poly_range, ind.range, inner);
            let mult = mult_asym_net(m, poly_range, ind.range, act)?;
            compose(&mult, &parallel(&[&poly, &ind.net])?)?
        };
        cube_nets.push(cube);
    }
    let net = if cube_nets.is_empty() {
        constant_net(dim, 0.0, act)?
    } else {
        let refs: Vec<&Network> = cube_nets.iter().collect();
        affine_output(&parallel(&refs)?, &vec![1.0; refs.len()], 0.0)?
    };
    // at most 2^D cubes overlap at any point
    let range = out_range * (1u64 << dim.min(62)) as f64;
    let params = SmoothParams { cubes_per_axis: ell, degree: p, inner_eps: inner, max_poly_range: max_poly, range };
    Ok((Built { net, error: region.volume() * delta, range }, params))
}

/// [`smooth_build`] with its `L²(R)` error measured on `points` nodes
/// (Simpson panels in one dimension, Halton points otherwise).
pub fn smooth_net(f: &HolderFn, beta: f64, delta: f64, region: &Region, act: Activation, points: usize) -> Result<ApproxReport> {
    let (built, sp) = smooth_build(f, beta, delta, region, act)?;
    let (measured, grid) = l2_error_box(&built.net, |x| f.eval(x), &region.lo, &region.hi, points);
    let mut params = BTreeMap::new();
    params.insert("beta".into(), beta);
    params.insert("delta".into(), delta);
    params.insert("ell".into(), sp.cubes_per_axis as f64);
    params.insert("degree".into(), sp.degree as f64);
    params.insert("eps".into(), sp.inner_eps);
    Ok(ApproxReport {
        name: "smooth".into(),
        network: built.net,
        target: f.describe(),
        claimed_bound: built.error,
        measured_error: measured,
        norm: ErrorNorm::L2,
        grid_size: grid,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::sup_error_grid;

    #[test]
    fn multi_indices_are_complete() {
        let k = multi_indices(2, 2);
        assert_eq!(k.len(), 6);
        assert_eq!(k[0], vec![0, 0]);
        assert_eq!(multi_indices(3, 2).len(), 10);
    }

    #[test]
    fn cube_indicator_inside_and_outside() {
        let act = Activation::ReLU;
        let net = cube_indicator_net(&[0.5, 0.5], 0.25, 0.05, act).unwrap();
        for &(x, y, want) in &[(0.5, 0.5, 1.0), (0.45, 0.58, 1.0), (0.1, 0.5, 0.0), (0.5, 0.9, 0.0), (0.0, 0.0, 0.0)] {
            let v = net.eval1(&[x, y]).unwrap();
            assert!((v - want).abs() <= 0.1, "({x},{y}) -> {v}");
        }
    }

    #[test]
    fn one_dimensional_cube_matches_ramp_pair() {
        let act = Activation::LeakyReLU { slope: 0.1 };
        let net = cube_indicator_net(&[0.5], 0.5, 0.1, act).unwrap();
        let g = step_net(0.1, 1.0, act).unwrap();
        for i in 0..=200 {
            let x = i as f64 / 200.0;
            let want = g.eval1(&[2.0 * (x - 0.25)]).unwrap() + g.eval1(&[2.0 * (0.75 - x)]).unwrap() - 1.0;
            assert!((net.eval1(&[x]).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_of_unity_is_exact_per_axis() {
        let f = HolderFn::polynomial(1, 2.0, vec![(vec![0], 1.0), (vec![1], 0.0), (vec![2], 1e-300)]);
        let (b, _) = smooth_build(&f, 2.0, 0.1, &Region::unit(1), Activation::ReLU).unwrap();
        // the tiny quadratic coefficient makes every cube a full term; the
        // result must still equal 1 up to multiplier error
        let e = sup_error_grid(&b.net, |_| 1.0, 1, 0.0, 1.0, 1001);
        assert!(e < 1e-2, "{e}");
    }

    #[test]
    fn constant_is_exact() {
        let f = HolderFn::constant(2, 0.7);
        let r = smooth_net(&f, 2.0, 0.1, &Region::unit(2), Activation::ReLU, 1 << 12).unwrap();
        assert!(r.measured_error < 1e-12);
    }

    #[test]
    fn product_within_delta() {
        let f = HolderFn::polynomial(2, 2.0, vec![(vec![1, 1], 1.0)]);
        let r = smooth_net(&f, 2.0, 0.1, &Region::unit(2), Activation::ReLU, 1 << 16).unwrap();
        assert!(r.measured_error <= 0.1, "{}", r.measured_error);
        assert_eq!(r.claimed_bound, 0.1);
    }

    #[test]
    fn sine_claimed_bound() {
        let f = HolderFn::sine(2, 2.0, 0.0, 1.0, 0.5, 0);
        let (b, p) = smooth_build(&f, 2.0, 0.05, &Region::unit(2), Activation::ReLU).unwrap();
        assert_eq!(b.error, 0.05);
        assert_eq!(p.cubes_per_axis, 5);
    }

    #[test]
    fn refuses_missing_orders_and_bad_delta() {
        let t = HolderFn::takagi(1, 0.5, 0.2, 4, 0);
        assert!(smooth_build(&t, 3.5, 0.1, &Region::unit(1), Activation::ReLU).is_err());
        let f = HolderFn::constant(1, 1.0);
        assert!(smooth_build(&f, 2.0, 1.0, &Region::unit(1), Activation::ReLU).is_err());
        assert!(matches!(smooth_build(&f, 2.0, 0.1, &Region::unit(1), Activation::Sigmoid), Err(Error::Unsupported(_))));
    }
}
