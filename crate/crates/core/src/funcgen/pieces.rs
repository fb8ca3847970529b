use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::holder::{sample_holder, Family, HolderFn};
use super::{Domain, Target};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream_rng, Stream};

/// One boundary graph `x_axis = h(x_{-axis})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub axis: usize,
    /// Function of the remaining `D - 1` coordinates (in order, `axis` removed).
    pub h: HolderFn,
}

/// `J` boundary graphs and a partition of the sign tuples `{+,-}^J` into
/// groups; group `m` is the piece `R_m`.
///
/// A sign tuple is a bit mask: bit `j` set means `x_{d_j} ≥ h_j(x_{-d_j})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub dim: usize,
    pub boundaries: Vec<Boundary>,
    pub groups: Vec<Vec<u32>>,
}

/// Removes coordinate `axis` from `x`.
pub(crate) fn drop_axis(x: &[f64], axis: usize) -> Vec<f64> {
    x.iter().enumerate().filter(|&(d, _)| d != axis).map(|(_, &v)| v).collect()
}

impl PieceSpec {
    pub fn new(dim: usize, boundaries: Vec<Boundary>, groups: Vec<Vec<u32>>) -> Result<Self> {
        let j = boundaries.len();
        if j > 16 {
            return Err(Error::InvalidParameter(format!("at most 16 boundaries supported, got {j}")));
        }
        for b in &boundaries {
            if b.axis >= dim.max(1) || b.h.dim + 1 != dim {
                return Err(Error::InvalidParameter(format!(
                    "boundary on axis {} with a {}-dimensional graph does not fit D={dim}",
                    b.axis, b.h.dim
                )));
            }
        }
        let mut seen = vec![false; 1 << j];
        for g in &groups {
            if g.is_empty() {
                return Err(Error::InvalidParameter("empty piece".into()));
            }
            for &t in g {
                let t = t as usize;
                if t >= seen.len() || seen[t] {
                    return Err(Error::InvalidParameter(format!("sign tuple {t} missing from range or assigned twice")));
                }
                seen[t] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter("sign-tuple groups do not exhaust {+,-}^J".into()));
        }
        Ok(PieceSpec { dim, boundaries, groups })
    }

    pub fn num_pieces(&self) -> usize {
        self.groups.len()
    }

    /// `(tuple, ties)`: the sign tuple of `x` and the mask of boundaries `x`
    /// lies exactly on.
    pub fn signs(&self, x: &[f64]) -> (u32, u32) {
        let (mut t, mut ties) = (0u32, 0u32);
        for (j, b) in self.boundaries.iter().enumerate() {
            let h = b.h.eval(&drop_axis(x, b.axis));
            let v = x[b.axis];
            if v >= h {
                t |= 1 << j;
            }
            if v == h {
                ties |= 1 << j;
            }
        }
        (t, ties)
    }

    /// Index of the piece containing `x`; on a boundary the lowest-indexed
    /// piece whose closure contains `x` wins.
    pub fn piece_of(&self, x: &[f64]) -> usize {
        let (t, ties) = self.signs(x);
        if ties == 0 {
            return self.groups.iter().position(|g| g.contains(&t)).expect("groups exhaust all tuples");
        }
        let base = t & !ties;
        self.groups
            .iter()
            .position(|g| g.iter().any(|&s| s & !ties == base))
            .expect("groups exhaust all tuples")
    }

    pub fn indicator(&self, m: usize, x: &[f64]) -> f64 {
        if self.piece_of(x) == m {
            1.0
        } else {
            0.0
        }
    }
}

/// `Σ_m f_m 1_{R_m}` with Hölder pieces `f_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSmoothFn {
    pub name: String,
    pub pieces: PieceSpec,
    pub fs: Vec<HolderFn>,
    pub alpha: f64,
    pub beta: f64,
    pub radius: f64,
    pub domain: Domain,
}

impl PiecewiseSmoothFn {
    pub fn new(name: impl Into<String>, pieces: PieceSpec, fs: Vec<HolderFn>, alpha: f64, beta: f64, domain: Domain) -> Result<Self> {
        if fs.len() != pieces.num_pieces() {
            return Err(Error::InvalidParameter(format!("{} piece functions for {} pieces", fs.len(), pieces.num_pieces())));
        }
        if fs.iter().any(|f| f.dim != pieces.dim) {
            return Err(Error::InvalidParameter("piece function dimension differs from D".into()));
        }
        let radius = fs.iter().map(|f| f.radius).fold(0.0, f64::max);
        Ok(PiecewiseSmoothFn { name: name.into(), pieces, fs, alpha, beta, radius, domain })
    }

    pub fn num_pieces(&self) -> usize {
        self.fs.len()
    }

    pub fn num_boundaries(&self) -> usize {
        self.pieces.boundaries.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        eval_piecewise(self, x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Target for PiecewiseSmoothFn {
    fn dim(&self) -> usize {
        self.pieces.dim
    }
    fn eval(&self, x: &[f64]) -> f64 {
        eval_piecewise(self, x)
    }
    fn domain(&self) -> Domain {
        self.domain
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

pub fn eval_piecewise(f: &PiecewiseSmoothFn, x: &[f64]) -> f64 {
    f.fs[f.pieces.piece_of(x)].eval(x)
}

/// Random pieces: `J` boundaries drawn as Hölder-`α` cosine series on
/// `I^{D-1}` and rescaled into `[0.2, 0.8]`, random axes, and a random
/// partition of the sign tuples into `M` nonempty groups. `F` is the
/// radius later used for the piece functions; boundaries are rescaled
/// independently of it.
pub fn make_pieces(seed: u64, alpha: f64, radius: f64, j: usize, m: usize, dim: usize) -> Result<PieceSpec> {
    if dim == 0 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    if j > 16 || m == 0 || m > (1usize << j) {
        return Err(Error::InvalidParameter(format!("need 1 <= M <= 2^J, got M={m}, J={j}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("F must be positive".into()));
    }
    let mut rng = stream_rng(seed, Stream::Partition);
    let boundaries = (0..j)
        .map(|k| {
            let mut h = sample_holder(derive_seed(seed, &[k as u64]), alpha, 0.3, dim - 1);
            if let Family::CosineSeries { scale, terms } = &mut h.family {
                let zero = terms.iter_mut().find(|(idx, _)| idx.iter().all(|&e| e == 0)).expect("series has a constant term");
                zero.1 += 0.5 / *scale;
            }
            h.radius = 0.8;
            Boundary { axis: rng.random_range(0..dim), h }
        })
        .collect();
    let mut tuples: Vec<u32> = (0..(1u32 << j)).collect();
    tuples.shuffle(&mut rng);
    let mut groups = vec![Vec::new(); m];
    for (i, t) in tuples.into_iter().enumerate() {
        let g = if i < m { i } else { rng.random_range(0..m) };
        groups[g].push(t);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    PieceSpec::new(dim, boundaries, groups)
}

/// Recognized names for [`named_target`].
pub const TARGET_NAMES: [&str; 5] = ["graph-indicator", "graph-indicator-rough", "rectangle", "quadrant", "disk"];

/// Named closed-form targets with default parameters (`D = 2`).
pub fn named_target(name: &str) -> Result<PiecewiseSmoothFn> {
    let (alpha, beta) = match name {
        "graph-indicator-rough" => (1.0, 2.0),
        _ => (2.0, 2.0),
    };
    named_target_with(name, alpha, beta, 2)
}

/// Named closed-form targets:
/// * `graph-indicator` — `1{x₂ ≥ 0.4 + 0.2 sin(2πx₁)}` on `I²`;
/// * `graph-indicator-rough` — `1{x₂ ≥ h(x₁)}` with a ten-level Takagi
///   curve `h = 0.3 + 0.4 T₁₀` (the Hölder-1 boundary);
/// * `rectangle` — `1_{[0,2/3]^D}`;
/// * `quadrant` — `1{x₁ ≥ 0} 1{x₂ ≥ 0}` on `[-1,1]²`;
/// * `disk` — indicator of the disk of radius 0.3 centred in `I²`.
///
/// `alpha` and `beta` label the boundary and piece smoothness the target
/// is used at; the piece functions are constants, smooth for every `β`.
pub fn named_target_with(name: &str, alpha: f64, beta: f64, dim: usize) -> Result<PiecewiseSmoothFn> {
    let one = |d| HolderFn::constant(d, 1.0);
    let zero = |d| HolderFn::constant(d, 0.0);
    match name {
        "graph-indicator" | "graph-indicator-rough" => {
            if dim != 2 {
                return Err(Error::InvalidParameter(format!("{name} is defined for D=2")));
            }
            let h = if name == "graph-indicator" {
                HolderFn::sine(1, alpha, 0.4, 0.2, 1.0, 0)
            } else {
                let mut t = HolderFn::takagi(1, 0.3, 0.4, 10, 0);
                t.beta = alpha;
                t
            };
            let spec = PieceSpec::new(2, vec![Boundary { axis: 1, h }], vec![vec![1], vec![0]])?;
            PiecewiseSmoothFn::new(name, spec, vec![one(2), zero(2)], alpha, beta, Domain::UnitCube)
        }
        "rectangle" => {
            let boundaries = (0..dim).map(|d| Boundary { axis: d, h: HolderFn::constant(dim - 1, 2.0 / 3.0) }).collect();
            let all = 1u32 << dim;
            let spec = PieceSpec::new(dim, boundaries, vec![vec![0], (1..all).collect()])?;
            PiecewiseSmoothFn::new("rectangle", spec, vec![one(dim), zero(dim)], alpha, beta, Domain::UnitCube)
        }
        "quadrant" => {
            if dim != 2 {
                return Err(Error::InvalidParameter("quadrant is defined for D=2".into()));
            }
            let boundaries = (0..2).map(|d| Boundary { axis: d, h: HolderFn::constant(1, 0.0) }).collect();
            let spec = PieceSpec::new(2, boundaries, vec![vec![3], vec![0, 1, 2]])?;
            PiecewiseSmoothFn::new("quadrant", spec, vec![one(2), zero(2)], alpha, beta, Domain::Symmetric)
        }
        "disk" => {
            if dim != 2 {
                return Err(Error::InvalidParameter("disk is defined for D=2".into()));
            }
            let arc = |sign: f64| HolderFn {
                dim: 1,
                beta: 0.5,
                radius: 0.8,
                max_order: 1,
                family: Family::CircleArc { cx: 0.5, cy: 0.5, r: 0.3, sign, axis: 0 },
            };
            let boundaries = vec![Boundary { axis: 1, h: arc(-1.0) }, Boundary { axis: 1, h: arc(1.0) }];
            let spec = PieceSpec::new(2, boundaries, vec![vec![1], vec![0, 2, 3]])?;
            PiecewiseSmoothFn::new("disk", spec, vec![one(2), zero(2)], 0.5, beta, Domain::UnitCube)
        }
        _ => Err(Error::InvalidParameter(format!("unknown target '{name}' (known: {})", TARGET_NAMES.join(", ")))),
    }
}
