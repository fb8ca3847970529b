//! Approximation of piecewise smooth functions: per-piece smooth networks
//! multiplied by approximate piece indicators.

use std::collections::BTreeMap;

use super::basic::{mult_asym_net, mult_depth_for};
use super::indicator::piece_indicator_on;
use super::smooth::{constant_net, smooth_build, Region};
use super::{l2_error_target, require_piecewise_linear, ApproxReport, Built, ErrorNorm};
use crate::error::{invalid, Result};
use crate::funcgen::{PiecewiseSmoothFn, Target};
use crate::network::{affine_output, compose, parallel, Activation, Network};

/// Data recorded by [`piecewise_smooth_build`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeParams {
    pub delta1: f64,
    pub delta2: f64,
    /// Coupling constant `C_F = 1 / (2 + F²)`.
    pub c_f: f64,
    pub pieces: usize,
    /// Largest cubes-per-axis count used by any boundary network.
    pub boundary_cells: usize,
    /// Largest cubes-per-axis count used by any piece function.
    pub smooth_cells: usize,
}

/// `ĝ = Σ_m g_c(g_{f,m}, g_{R,m})` with `g_{f,m}` from the grid-of-cubes
/// builder at accuracy `δ1 = ε1` and `g_{R,m}` the piece indicator at
/// accuracy `δ2 = C_F ε2 / M`. Constant pieces skip the multiplier.
pub fn piecewise_smooth_build(f: &PiecewiseSmoothFn, eps1: f64, eps2: f64, act: Activation) -> Result<(Built, CompositeParams)> {
    require_piecewise_linear(act, "piecewise smooth")?;
    if !(eps1 > 0.0 && eps1 < 1.0 && eps2 > 0.0 && eps2 < 1.0) {
        return invalid(format!("ε1 and ε2 must lie in (0,1), got {eps1} and {eps2}"));
    }
    let dim = f.dim();
    let m_pieces = f.num_pieces();
    let c_f = 1.0 / (2.0 + f.radius * f.radius);
    let delta1 = eps1;
    let delta2 = c_f * eps2 / m_pieces as f64;
    let (lo, hi) = f.domain.bounds();
    let region = Region { lo: vec![lo; dim], hi: vec![hi; dim] };

    let mut terms = Vec::new();
    let mut smooth_cells = 0;
    let mut boundary_cells = 0;
    let mut range = 0.0;
    for (m, fm) in f.fs.iter().enumerate() {
        if fm.as_constant() == Some(0.0) {
            continue;
        }
        let (ind, ip) = piece_indicator_on(&f.pieces, m, delta2, act, lo, hi)?;
        boundary_cells = boundary_cells.max(ip.boundary_cells);
        let term = if let Some(c) = fm.as_constant() {
            range += c.abs() * ind.range;
            affine_output(&ind.net, &[c], 0.0)?
        } else {
            let (g, sp) = smooth_build(fm, f.beta, delta1, &region, act)?;
            smooth_cells = smooth_cells.max(sp.cubes_per_axis);
            if ip.tuples == 1 << ip.boundaries {
                range += g.range;
                g.net
            } else {
                let mm = mult_depth_for(g.range, ind.range, delta2);
                let mult = mult_asym_net(mm, g.range, ind.range, act)?;
                range += g.range * ind.range;
                compose(&mult, &parallel(&[&g.net, &ind.net])?)?
            }
        };
        terms.push(term);
    }
    let net = if terms.is_empty() {
        constant_net(dim, 0.0, act)?
    } else {
        let refs: Vec<&Network> = terms.iter().collect();
        affine_output(&parallel(&refs)?, &vec![1.0; refs.len()], 0.0)?
    };
    let params = CompositeParams { delta1, delta2, c_f, pieces: m_pieces, boundary_cells, smooth_cells };
    Ok((Built { net, error: eps1 + eps2, range }, params))
}

/// [`piecewise_smooth_build`] with its `L²` error over the target's domain
/// measured on `points` nodes.
pub fn piecewise_smooth_net(f: &PiecewiseSmoothFn, eps1: f64, eps2: f64, act: Activation, points: usize) -> Result<ApproxReport> {
    let (built, p) = piecewise_smooth_build(f, eps1, eps2, act)?;
    let (measured, grid) = l2_error_target(&built.net, f, points);
    let metrics = built.net.metrics();
    let mut params = BTreeMap::new();
    params.insert("eps1".into(), eps1);
    params.insert("eps2".into(), eps2);
    params.insert("delta1".into(), p.delta1);
    params.insert("delta2".into(), p.delta2);
    params.insert("C_F".into(), p.c_f);
    params.insert("M".into(), p.pieces as f64);
    params.insert("J".into(), f.num_boundaries() as f64);
    params.insert("alpha".into(), f.alpha);
    params.insert("beta".into(), f.beta);
    params.insert("ell_boundary".into(), p.boundary_cells as f64);
    params.insert("ell_smooth".into(), p.smooth_cells as f64);
    params.insert("L".into(), metrics.depth as f64);
    params.insert("S".into(), metrics.sparsity as f64);
    params.insert("B".into(), metrics.magnitude);
    Ok(ApproxReport {
        name: "piecewise-smooth".into(),
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
    use crate::constructor::smooth_net;
    use crate::funcgen::{named_target, Domain, HolderFn, PieceSpec};

    #[test]
    fn single_piece_reduces_to_smooth() {
        let g = HolderFn::polynomial(2, 2.0, vec![(vec![1, 1], 1.0)]);
        let spec = PieceSpec::new(2, vec![], vec![vec![0]]).unwrap();
        let f = PiecewiseSmoothFn::new("one piece", spec, vec![g.clone()], 1.0, 2.0, Domain::UnitCube).unwrap();
        let r = piecewise_smooth_net(&f, 0.1, 0.1, Activation::ReLU, 1 << 14).unwrap();
        let s = smooth_net(&g, 2.0, 0.1, &Region::unit(2), Activation::ReLU, 1 << 14).unwrap();
        assert_eq!(r.network, s.network);
        assert!(r.measured_error <= 0.1);
    }

    #[test]
    fn rectangle_within_bound() {
        let f = named_target("rectangle").unwrap();
        let r = piecewise_smooth_net(&f, 0.1, 0.1, Activation::ReLU, 1 << 14).unwrap();
        assert!(r.measured_error <= 0.2, "{}", r.measured_error);
    }

    #[test]
    fn smooth_activation_is_unsupported() {
        let f = named_target("rectangle").unwrap();
        assert!(matches!(piecewise_smooth_build(&f, 0.1, 0.1, Activation::Sigmoid), Err(crate::Error::Unsupported(_))));
    }
}
