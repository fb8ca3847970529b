//! Indicators of half-spaces bounded by graphs, and of pieces built from
//! them.

use std::collections::BTreeMap;

use super::basic::{product_depth_for, product_net};
use super::smooth::{constant_net, smooth_build, Region};
use super::step::step_net;
use super::{l2_error_box, require_piecewise_linear, ApproxReport, Built, ErrorNorm};
use crate::error::{invalid, Error, Result};
use crate::funcgen::{Boundary, PieceSpec};
use crate::network::{affine_output, compose, parallel, Activation, Layer, Network};

/// Side of a boundary graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// `x_d ≥ h(x_{-d})`
    Plus,
    /// `x_d < h(x_{-d})`
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `x ↦ (x_d, h_net(x_{-d}))` on `D = h_net.input_width() + 1` inputs.
fn split_axis(h_net: &Network, axis: usize) -> Result<Network> {
    let dim = h_net.input_width() + 1;
    if axis >= dim {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range for D={dim}")));
    }
    let act = h_net.activation();
    let rest: Vec<usize> = (0..dim).filter(|&d| d != axis).collect();
    let xd = Network::select(dim, &[axis], act)?;
    let h = compose(h_net, &Network::select(dim, &rest, act)?)?;
    parallel(&[&xd, &h])
}

/// `g_s(±(x_d - h_net(x_{-d})))` with `g_s` from [`step_net`] on
/// `[-1, 1]`.
pub fn halfspace_indicator_net(h_net: &Network, axis: usize, sign: Sign, eps: f64, act: Activation) -> Result<Network> {
    require_piecewise_linear(act, "half-space indicator")?;
    if h_net.activation() != act {
        return Err(Error::ActivationMismatch(format!("h_net uses {} but {} requested", h_net.activation().name(), act.name())));
    }
    if h_net.output_width() != 1 {
        return Err(Error::WidthMismatch("boundary network must have one output".into()));
    }
    let g = step_net(eps, 1.0, act)?;
    let pair = split_axis(h_net, axis)?;
    let s = sign.factor();
    let diff = affine_output(&pair, &[s, -s], 0.0)?;
    compose(&g, &diff)
}

/// Data recorded by [`piece_indicator_built`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorParams {
    /// Sign tuples in the piece.
    pub tuples: usize,
    pub boundaries: usize,
    /// Accuracy of each step.
    pub step_eps: f64,
    /// `L²` accuracy of each boundary network.
    pub boundary_delta: f64,
    /// Sup error of each tuple's product.
    pub mult_eps: f64,
    /// Largest cubes-per-axis count among the boundary networks.
    pub boundary_cells: usize,
}

/// Boundary network: exact for constant graphs, otherwise the grid-of-cubes
/// approximation with `L²(I^{D-1})` accuracy `delta`.
fn boundary_net(b: &Boundary, delta: f64, act: Activation, lo: f64, hi: f64) -> Result<(Network, usize)> {
    let k = b.h.dim;
    if let Some(c) = b.h.as_constant() {
        return Ok((constant_net(k, c, act)?, 1));
    }
    let region = Region { lo: vec![lo; k], hi: vec![hi; k] };
    let (built, p) = smooth_build(&b.h, b.h.beta, delta, &region, act)?;
    Ok((built.net, p.cubes_per_axis))
}

/// Approximate indicator of piece `m`: the sum over its sign tuples of the
/// product over boundaries of the matching half-space steps. An error
/// budget `ε/2` is split evenly over the `K·J` step factors (half to the
/// step, half to the boundary's square-root contribution); the remaining
/// `ε/2` covers the `K` products.
pub fn piece_indicator_built(spec: &PieceSpec, m: usize, eps: f64, act: Activation) -> Result<(Built, IndicatorParams)> {
    piece_indicator_on(spec, m, eps, act, 0.0, 1.0)
}

/// As [`piece_indicator_built`] on the cube `[lo, hi]^D`.
pub(crate) fn piece_indicator_on(spec: &PieceSpec, m: usize, eps: f64, act: Activation, lo: f64, hi: f64) -> Result<(Built, IndicatorParams)> {
    require_piecewise_linear(act, "piece indicator")?;
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("indicator accuracy must lie in (0,1), got {eps}"));
    }
    let group = spec.groups.get(m).ok_or_else(|| Error::InvalidParameter(format!("piece {m} out of range")))?;
    let dim = spec.dim;
    let j = spec.boundaries.len();
    let k = group.len();
    if k == 1 << j {
        let params = IndicatorParams { tuples: k, boundaries: j, step_eps: 0.0, boundary_delta: 0.0, mult_eps: 0.0, boundary_cells: 0 };
        return Ok((Built { net: constant_net(dim, 1.0, act)?, error: 0.0, range: 1.0 }, params));
    }
    let e_h = eps / (2.0 * (k * j) as f64);
    let step_eps = e_h / 2.0;
    let delta_h = (e_h / 2.0).powi(2);
    let mult_eps = eps / (2.0 * k as f64);
    let g = step_net(step_eps, hi - lo, act)?;

    // differences z_j = x_{d_j} - ĥ_j(x_{-d_j}), shared by all tuples
    let mut diffs = Vec::with_capacity(j);
    let mut cells = 0;
    for b in &spec.boundaries {
        let (h, c) = boundary_net(b, delta_h, act, lo, hi)?;
        cells = cells.max(c);
        diffs.push(affine_output(&split_axis(&h, b.axis)?, &[1.0, -1.0], 0.0)?);
    }
    let refs: Vec<&Network> = diffs.iter().collect();
    let z = parallel(&refs)?;

    // steps for each (boundary, sign) pair that occurs: columns 2j (plus), 2j+1 (minus)
    let mut used = vec![false; 2 * j];
    for &t in group {
        for b in 0..j {
            used[2 * b + usize::from((t >> b) & 1 == 0)] = true;
        }
    }
    let cols: Vec<usize> = (0..2 * j).filter(|&c| used[c]).collect();
    let mut steps = Vec::with_capacity(cols.len());
    for &c in &cols {
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        let pick = Network::new(vec![Layer::from_triplets(1, j, vec![(0, c / 2, s)], vec![0.0])?], act)?;
        steps.push(compose(&g, &pick)?);
    }
    let srefs: Vec<&Network> = steps.iter().collect();
    let step_layer = compose(&parallel(&srefs)?, &z)?;
    let pos = |c: usize| cols.iter().position(|&x| x == c).unwrap();

    let ranges = vec![1.0; j];
    let mp = if j > 1 { product_depth_for(&ranges, mult_eps) } else { 0 };
    let prod = if j > 1 { Some(product_net(&ranges, mp, act)?) } else { None };
    let mut tuple_nets = Vec::with_capacity(k);
    let mut range = 0.0;
    for &t in group {
        let pick: Vec<usize> = (0..j).map(|b| pos(2 * b + usize::from((t >> b) & 1 == 0))).collect();
        let sel = Network::select(cols.len(), &pick, act)?;
        match &prod {
            Some(p) => {
                tuple_nets.push(compose(&p.net, &sel)?);
                range += p.range;
            }
            None => {
                tuple_nets.push(sel);
                range += 1.0;
            }
        }
    }
    let trefs: Vec<&Network> = tuple_nets.iter().collect();
    let sum = affine_output(&parallel(&trefs)?, &vec![1.0; k], 0.0)?;
    let net = compose(&sum, &step_layer)?;
    let params = IndicatorParams {
        tuples: k,
        boundaries: j,
        step_eps,
        boundary_delta: delta_h,
        mult_eps: prod.as_ref().map_or(0.0, |p| p.error),
        boundary_cells: cells,
    };
    Ok((Built { net, error: eps, range }, params))
}

/// Approximate indicator of piece `m` of `spec` with `L²(I^D)` error at
/// most `eps`, measured on `points` Halton nodes.
pub fn piece_indicator_net(spec: &PieceSpec, m: usize, eps: f64, act: Activation, points: usize) -> Result<ApproxReport> {
    let (built, p) = piece_indicator_built(spec, m, eps, act)?;
    let dim = spec.dim;
    let (measured, grid) = l2_error_box(&built.net, |x| spec.indicator(m, x), &vec![0.0; dim], &vec![1.0; dim], points);
    let mut params = BTreeMap::new();
    params.insert("eps".into(), eps);
    params.insert("J".into(), p.boundaries as f64);
    params.insert("K".into(), p.tuples as f64);
    params.insert("step_eps".into(), p.step_eps);
    params.insert("delta_h".into(), p.boundary_delta);
    params.insert("ell".into(), p.boundary_cells as f64);
    Ok(ApproxReport {
        name: "piece-indicator".into(),
        network: built.net,
        target: format!("piece {m} of {} boundaries", p.boundaries),
        claimed_bound: eps,
        measured_error: measured,
        norm: ErrorNorm::L2,
        grid_size: grid,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgen::HolderFn;

    fn flat(dim: usize, c: f64) -> Network {
        constant_net(dim, c, Activation::ReLU).unwrap()
    }

    #[test]
    fn halfspace_sides() {
        let h = flat(1, 0.5);
        let up = halfspace_indicator_net(&h, 1, Sign::Plus, 0.05, Activation::ReLU).unwrap();
        let down = halfspace_indicator_net(&h, 1, Sign::Minus, 0.05, Activation::ReLU).unwrap();
        assert!((up.eval1(&[0.3, 0.9]).unwrap() - 1.0).abs() < 1e-12);
        assert!(up.eval1(&[0.3, 0.1]).unwrap().abs() < 1e-12);
        assert!(down.eval1(&[0.3, 0.9]).unwrap().abs() < 1e-12);
        assert!((down.eval1(&[0.3, 0.1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn halfspace_in_one_dimension() {
        let h = flat(0, 0.25);
        let up = halfspace_indicator_net(&h, 0, Sign::Plus, 0.05, Activation::ReLU).unwrap();
        assert_eq!(up.input_width(), 1);
        assert!((up.eval1(&[0.9]).unwrap() - 1.0).abs() < 1e-12);
        assert!(up.eval1(&[0.0]).unwrap().abs() < 1e-12);
    }

    #[test]
    fn halfspace_axis_out_of_range() {
        assert!(halfspace_indicator_net(&flat(1, 0.5), 2, Sign::Plus, 0.1, Activation::ReLU).is_err());
    }

    #[test]
    fn single_flat_boundary_matches_halfspace() {
        let spec = PieceSpec::new(2, vec![Boundary { axis: 1, h: HolderFn::constant(1, 0.5) }], vec![vec![0], vec![1]]).unwrap();
        let (b, p) = piece_indicator_built(&spec, 1, 0.1, Activation::ReLU).unwrap();
        let hs = halfspace_indicator_net(&flat(1, 0.5), 1, Sign::Plus, p.step_eps, Activation::ReLU).unwrap();
        for i in 0..=50 {
            for jj in 0..=50 {
                let x = [i as f64 / 50.0, jj as f64 / 50.0];
                assert!((b.net.eval1(&x).unwrap() - hs.eval1(&x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadrant_within_eps() {
        let spec = PieceSpec::new(
            2,
            vec![Boundary { axis: 0, h: HolderFn::constant(1, 0.5) }, Boundary { axis: 1, h: HolderFn::constant(1, 0.5) }],
            vec![vec![3], vec![0, 1, 2]],
        )
        .unwrap();
        for m in 0..2 {
            let r = piece_indicator_net(&spec, m, 0.05, Activation::ReLU, 1 << 16).unwrap();
            assert!(r.measured_error <= 0.05, "piece {m}: {}", r.measured_error);
        }
    }

    #[test]
    fn all_tuples_is_constant_one() {
        let spec = PieceSpec::new(2, vec![Boundary { axis: 1, h: HolderFn::constant(1, 0.5) }], vec![vec![0, 1]]).unwrap();
        let (b, _) = piece_indicator_built(&spec, 0, 0.1, Activation::ReLU).unwrap();
        assert_eq!(b.net.eval1(&[0.2, 0.3]).unwrap(), 1.0);
    }
}
