//! Feed-forward networks: alternating affine maps and a fixed element-wise
//! activation, with the final layer affine only.
//!
//! Layers are stored row-compressed. The constructive approximators place
//! hundreds of small sub-networks side by side, which makes their weight
//! matrices overwhelmingly block-diagonal; the size metrics are computed
//! from the stored values exactly as they would be from dense matrices.

mod activation;
mod serial;

pub use activation::{sigmoid, softplus, Activation, Condition, MAX_DERIVATIVE};
pub use serial::{NETWORK_FORMAT, NETWORK_FORMAT_VERSION};

use crate::error::{Error, Result};

/// Entries with magnitude below this count as zero in the sparsity metric.
pub const ZERO_TOL: f64 = 1e-15;

/// One affine map `z ↦ W z + b` with `W` of shape `rows × cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    bias: Vec<f64>,
}

impl Layer {
    /// From a row-major dense matrix.
    pub fn from_dense(rows: usize, cols: usize, weights: &[f64], bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(Error::WidthMismatch(format!(
                "dense layer {rows}x{cols} given {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for r in 0..rows {
            for c in 0..cols {
                let w = weights[r * cols + c];
                if w != 0.0 {
                    col_idx.push(c);
                    vals.push(w);
                }
            }
            row_ptr.push(vals.len());
        }
        Ok(Layer { rows, cols, row_ptr, col_idx, vals, bias })
    }

    /// From `(row, col, value)` triplets; duplicates are summed and exact
    /// zeros dropped from storage.
    pub fn from_triplets(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != rows {
            return Err(Error::WidthMismatch(format!("layer has {rows} rows but {} biases", bias.len())));
        }
        if let Some(&(r, c, _)) = entries.iter().find(|&&(r, c, _)| r >= rows || c >= cols) {
            return Err(Error::WidthMismatch(format!("entry ({r},{c}) outside {rows}x{cols}")));
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        let mut keep_c = Vec::with_capacity(vals.len());
        let mut keep_v = Vec::with_capacity(vals.len());
        for i in 0..vals.len() {
            if vals[i] != 0.0 {
                row_ptr[rows_of[i] + 1] += 1;
                keep_c.push(col_idx[i]);
                keep_v.push(vals[i]);
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Layer { rows, cols, row_ptr, col_idx: keep_c, vals: keep_v, bias })
    }

    pub fn identity(n: usize) -> Self {
        Layer {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![1.0; n],
            bias: vec![0.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Stored `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// Number of stored weights.
    pub fn stored(&self) -> usize {
        self.vals.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out[r * self.cols + c] = v;
            }
        }
        out
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for r in 0..self.rows {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = self.bias[r];
            for k in a..b {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            out[r] = acc;
        }
    }

    fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.vals.iter().chain(self.bias.iter()).copied()
    }

    /// `self ∘ inner` as one affine map.
    fn after(&self, inner: &Layer) -> Layer {
        debug_assert_eq!(self.cols, inner.rows);
        let mut acc = vec![0.0; inner.cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; inner.cols];
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut bias = Vec::with_capacity(self.rows);
        row_ptr.push(0);
        for r in 0..self.rows {
            let mut b = self.bias[r];
            for (k, w) in self.row(r) {
                b += w * inner.bias[k];
                for (c, v) in inner.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += w * v;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c] != 0.0 {
                    col_idx.push(c);
                    vals.push(acc[c]);
                }
                acc[c] = 0.0;
                mark[c] = false;
            }
            touched.clear();
            row_ptr.push(vals.len());
            bias.push(b);
        }
        Layer { rows: self.rows, cols: inner.cols, row_ptr, col_idx, vals, bias }
    }

    /// Stacks layers block-diagonally (or, with `shared_input`, vertically
    /// over a common input).
    fn stack(parts: &[&Layer], shared_input: bool) -> Layer {
        let rows: usize = parts.iter().map(|l| l.rows).sum();
        let cols = if shared_input { parts[0].cols } else { parts.iter().map(|l| l.cols).sum() };
        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut bias = Vec::with_capacity(rows);
        row_ptr.push(0);
        let mut off = 0;
        for l in parts {
            for r in 0..l.rows {
                for (c, v) in l.row(r) {
                    col_idx.push(c + off);
                    vals.push(v);
                }
                row_ptr.push(vals.len());
            }
            bias.extend_from_slice(&l.bias);
            if !shared_input {
                off += l.cols;
            }
        }
        Layer { rows, cols, row_ptr, col_idx, vals, bias }
    }
}

/// Size operators: depth, nonzero count and largest parameter magnitude.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SizeMetrics {
    pub depth: usize,
    pub sparsity: usize,
    pub magnitude: f64,
}

/// A feed-forward network `g_L ∘ η ∘ g_{L-1} ∘ … ∘ η ∘ g_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    act: Activation,
    clip: Option<f64>,
}

impl Network {
    pub fn new(layers: Vec<Layer>, act: Activation) -> Result<Self> {
        act.validate()?;
        if layers.is_empty() {
            return Err(Error::Empty("network needs at least one layer".into()));
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].rows != w[1].cols {
                return Err(Error::WidthMismatch(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    w[0].rows,
                    i + 1,
                    w[1].cols
                )));
            }
        }
        Ok(Network { layers, act, clip: None })
    }

    /// Single affine layer `x ↦ W x + b` from a row-major dense `W`.
    pub fn affine(rows: usize, cols: usize, weights: &[f64], bias: Vec<f64>, act: Activation) -> Result<Self> {
        Network::new(vec![Layer::from_dense(rows, cols, weights, bias)?], act)
    }

    /// The width-`n` identity as one affine layer.
    pub fn identity(n: usize, act: Activation) -> Self {
        Network { layers: vec![Layer::identity(n)], act, clip: None }
    }

    /// Picks coordinates `idx` out of a width-`n` input.
    pub fn select(n: usize, idx: &[usize], act: Activation) -> Result<Self> {
        let entries = idx.iter().enumerate().map(|(r, &c)| (r, c, 1.0)).collect();
        Network::new(vec![Layer::from_triplets(idx.len(), n, entries, vec![0.0; idx.len()])?], act)
    }

    /// Exact width-`n` identity of the given depth. Depth ≥ 2 routes every
    /// coordinate through the pair `(η(z), η(-z))`, which recombines as
    /// `(η(z) - η(-z)) / (c1 + c2) = z`; only piecewise-linear activations
    /// admit this.
    pub fn deep_identity(n: usize, depth: usize, act: Activation) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        if depth == 1 {
            return Ok(Network::identity(n, act));
        }
        let (c1, c2) = act
            .slopes()
            .ok_or_else(|| Error::Unsupported(format!("exact identity of depth {depth} needs a piecewise-linear activation, got {}", act.name())))?;
        let s = 1.0 / (c1 + c2);
        let mut layers = Vec::with_capacity(depth);
        let mut first = Vec::with_capacity(2 * n);
        for i in 0..n {
            first.push((2 * i, i, 1.0));
            first.push((2 * i + 1, i, -1.0));
        }
        layers.push(Layer::from_triplets(2 * n, n, first, vec![0.0; 2 * n])?);
        for _ in 0..depth - 2 {
            let mut mid = Vec::with_capacity(4 * n);
            for i in 0..n {
                mid.push((2 * i, 2 * i, s));
                mid.push((2 * i, 2 * i + 1, -s));
                mid.push((2 * i + 1, 2 * i, -s));
                mid.push((2 * i + 1, 2 * i + 1, s));
            }
            layers.push(Layer::from_triplets(2 * n, 2 * n, mid, vec![0.0; 2 * n])?);
        }
        let mut last = Vec::with_capacity(2 * n);
        for i in 0..n {
            last.push((i, 2 * i, s));
            last.push((i, 2 * i + 1, -s));
        }
        layers.push(Layer::from_triplets(n, 2 * n, last, vec![0.0; n])?);
        Network::new(layers, act)
    }

    pub fn with_clip(mut self, bound: Option<f64>) -> Self {
        self.clip = bound;
        self
    }

    pub fn clip(&self) -> Option<f64> {
        self.clip
    }

    pub fn activation(&self) -> Activation {
        self.act
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_width(&self) -> usize {
        self.layers.last().unwrap().rows
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Widths `D_0, D_1, …, D_L`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width()).chain(self.layers.iter().map(|l| l.rows)).collect()
    }

    pub fn metrics(&self) -> SizeMetrics {
        let mut sparsity = 0;
        let mut magnitude: f64 = 0.0;
        for l in &self.layers {
            for p in l.params() {
                let a = p.abs();
                if a >= ZERO_TOL {
                    sparsity += 1;
                }
                magnitude = magnitude.max(a);
            }
        }
        SizeMetrics { depth: self.layers.len(), sparsity, magnitude }
    }

    fn max_width(&self) -> usize {
        self.widths().into_iter().max().unwrap()
    }

    /// Reusable buffers for repeated evaluation.
    pub fn scratch(&self) -> Scratch {
        let w = self.max_width();
        Scratch { a: vec![0.0; w], b: vec![0.0; w] }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut s = self.scratch();
        Ok(self.evaluate_with(x, &mut s)?.to_vec())
    }

    /// Evaluates into `scratch`, returning a view of the output.
    pub fn evaluate_with<'s>(&self, x: &[f64], scratch: &'s mut Scratch) -> Result<&'s [f64]> {
        if x.len() != self.input_width() {
            return Err(Error::InputShape { expected: self.input_width(), got: x.len() });
        }
        let Scratch { a, b } = scratch;
        a[..x.len()].copy_from_slice(x);
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            l.apply_into(&a[..l.cols], &mut b[..l.rows]);
            if i < last {
                for v in &mut b[..l.rows] {
                    *v = self.act.apply(*v);
                }
            }
            std::mem::swap(a, b);
        }
        let out = &mut a[..self.output_width()];
        if let Some(f) = self.clip {
            for v in out.iter_mut() {
                *v = v.clamp(-f, f);
            }
        }
        Ok(out)
    }

    /// Scalar output of a width-1 network.
    pub fn eval1(&self, x: &[f64]) -> Result<f64> {
        if self.output_width() != 1 {
            return Err(Error::WidthMismatch(format!("eval1 on a network with {} outputs", self.output_width())));
        }
        Ok(self.evaluate(x)?[0])
    }

    /// Evaluates a width-1 network at every row of a row-major point array.
    pub fn eval_points(&self, points: &[f64], dim: usize) -> Result<Vec<f64>> {
        if self.output_width() != 1 {
            return Err(Error::WidthMismatch(format!("eval_points on a network with {} outputs", self.output_width())));
        }
        let mut s = self.scratch();
        points.chunks(dim).map(|p| self.evaluate_with(p, &mut s).map(|o| o[0])).collect()
    }
}

/// Evaluation buffers sized for one network.
#[derive(Debug, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

fn check_same_activation(a: &Network, b: &Network) -> Result<()> {
    if a.act != b.act {
        return Err(Error::ActivationMismatch(format!("{} vs {}", a.act.name(), b.act.name())));
    }
    Ok(())
}

/// `outer ∘ inner`. The last affine map of `inner` and the first of `outer`
/// merge into one, so the depth is `L_outer + L_inner - 1`.
pub fn compose(outer: &Network, inner: &Network) -> Result<Network> {
    check_same_activation(outer, inner)?;
    if inner.output_width() != outer.input_width() {
        return Err(Error::WidthMismatch(format!(
            "inner outputs {} but outer expects {}",
            inner.output_width(),
            outer.input_width()
        )));
    }
    let mut layers: Vec<Layer> = inner.layers[..inner.layers.len() - 1].to_vec();
    layers.push(outer.layers[0].after(inner.layers.last().unwrap()));
    layers.extend_from_slice(&outer.layers[1..]);
    Ok(Network { layers, act: outer.act, clip: outer.clip })
}

/// Composes a chain `nets[0] ∘ nets[1] ∘ …`.
pub fn compose_all(nets: &[&Network]) -> Result<Network> {
    let (last, rest) = nets.split_last().ok_or_else(|| Error::Empty("compose_all of nothing".into()))?;
    let mut acc = (*last).clone();
    for n in rest.iter().rev() {
        acc = compose(n, &acc)?;
    }
    Ok(acc)
}

/// Extends a network to `depth` layers without changing its function.
pub fn pad_to_depth(net: &Network, depth: usize) -> Result<Network> {
    let l = net.depth();
    if depth < l {
        return Err(Error::InvalidParameter(format!("cannot pad depth {l} down to {depth}")));
    }
    if depth == l {
        return Ok(net.clone());
    }
    let id = Network::deep_identity(net.output_width(), depth - l + 1, net.act)?;
    compose(&id, net)
}

/// Runs `nets` side by side on a shared input and concatenates their
/// outputs. Shallower members are padded with exact identity layers.
pub fn parallel(nets: &[&Network]) -> Result<Network> {
    let first = nets.first().ok_or_else(|| Error::Empty("parallel of no networks".into()))?;
    for n in nets {
        check_same_activation(first, n)?;
        if n.input_width() != first.input_width() {
            return Err(Error::WidthMismatch(format!(
                "parallel members take inputs of width {} and {}",
                first.input_width(),
                n.input_width()
            )));
        }
    }
    let depth = nets.iter().map(|n| n.depth()).max().unwrap();
    let padded: Vec<Network> = nets.iter().map(|n| pad_to_depth(n, depth)).collect::<Result<_>>()?;
    let layers = (0..depth)
        .map(|i| {
            let parts: Vec<&Layer> = padded.iter().map(|n| &n.layers[i]).collect();
            Layer::stack(&parts, i == 0)
        })
        .collect();
    Ok(Network { layers, act: first.act, clip: None })
}

/// Runs `nets` side by side on disjoint input blocks (inputs concatenated).
pub fn parallel_disjoint(nets: &[&Network]) -> Result<Network> {
    let first = nets.first().ok_or_else(|| Error::Empty("parallel of no networks".into()))?;
    for n in nets {
        check_same_activation(first, n)?;
    }
    let depth = nets.iter().map(|n| n.depth()).max().unwrap();
    let padded: Vec<Network> = nets.iter().map(|n| pad_to_depth(n, depth)).collect::<Result<_>>()?;
    let layers = (0..depth)
        .map(|i| {
            let parts: Vec<&Layer> = padded.iter().map(|n| &n.layers[i]).collect();
            Layer::stack(&parts, false)
        })
        .collect();
    Ok(Network { layers, act: first.act, clip: None })
}

/// `x ↦ ⟨weights, net(x)⟩ + bias`.
pub fn affine_output(net: &Network, weights: &[f64], bias: f64) -> Result<Network> {
    if weights.len() != net.output_width() {
        return Err(Error::WidthMismatch(format!(
            "{} output weights for a network with {} outputs",
            weights.len(),
            net.output_width()
        )));
    }
    let head = Network::affine(1, weights.len(), weights, vec![bias], net.act)?;
    compose(&head, net)
}

/// General affine post-map `x ↦ W net(x) + b` (row-major `W`).
pub fn affine_map(net: &Network, rows: usize, weights: &[f64], bias: Vec<f64>) -> Result<Network> {
    let head = Network::affine(rows, net.output_width(), weights, bias, net.act)?;
    compose(&head, net)
}

/// Sparse affine pre-map: `x ↦ net(W x + b)`.
pub fn precompose_affine(net: &Network, cols: usize, entries: Vec<(usize, usize, f64)>, bias: Vec<f64>) -> Result<Network> {
    let pre = Network::new(vec![Layer::from_triplets(net.input_width(), cols, entries, bias)?], net.act)?;
    compose(net, &pre)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relu_signed_identity() -> Network {
        // max(x,0) - max(-x,0)
        Network::new(
            vec![
                Layer::from_dense(2, 1, &[1.0, -1.0], vec![0.0, 0.0]).unwrap(),
                Layer::from_dense(1, 2, &[1.0, -1.0], vec![0.0]).unwrap(),
            ],
            Activation::ReLU,
        )
        .unwrap()
    }

    #[test]
    fn identity_network() {
        let id = Network::identity(1, Activation::ReLU);
        assert_eq!(id.eval1(&[0.7]).unwrap(), 0.7);
        let m = id.metrics();
        assert_eq!((m.depth, m.sparsity, m.magnitude), (1, 1, 1.0));
    }

    #[test]
    fn two_layer_hand_evaluation() {
        assert_eq!(relu_signed_identity().eval1(&[-0.3]).unwrap(), -0.3);
    }

    #[test]
    fn zeroed_row_excluded_from_sparsity() {
        let n = Network::affine(2, 2, &[1.0, 2.0, 0.0, 0.0], vec![0.0, 0.0], Activation::ReLU).unwrap();
        assert_eq!(n.metrics().sparsity, 2);
        let tiny = Network::affine(1, 2, &[1.0, 1e-17], vec![0.0], Activation::ReLU).unwrap();
        assert_eq!(tiny.metrics().sparsity, 1);
    }

    #[test]
    fn input_shape_error() {
        let id = Network::identity(2, Activation::ReLU);
        assert!(matches!(id.evaluate(&[1.0]), Err(Error::InputShape { expected: 2, got: 1 })));
    }

    #[test]
    fn compose_mismatches() {
        let a = Network::identity(2, Activation::ReLU);
        let b = Network::identity(3, Activation::ReLU);
        assert!(matches!(compose(&a, &b), Err(Error::WidthMismatch(_))));
        let c = Network::identity(2, Activation::Sigmoid);
        assert!(matches!(compose(&a, &c), Err(Error::ActivationMismatch(_))));
    }

    #[test]
    fn compose_identities() {
        let id = Network::identity(1, Activation::ReLU);
        let c = compose(&id, &id).unwrap();
        for i in 0..=10 {
            let x = i as f64 / 10.0;
            assert_eq!(c.eval1(&[x]).unwrap(), x);
        }
    }

    #[test]
    fn parallel_identities() {
        let id = Network::identity(1, Activation::ReLU);
        let p = parallel(&[&id, &id]).unwrap();
        assert_eq!(p.evaluate(&[0.4]).unwrap(), vec![0.4, 0.4]);
        let wide = Network::identity(2, Activation::ReLU);
        assert!(parallel(&[&id, &wide]).is_err());
        assert!(parallel(&[]).is_err());
    }

    #[test]
    fn parallel_pads_depth_exactly() {
        for act in [Activation::ReLU, Activation::LeakyReLU { slope: 0.2 }, Activation::AffinePiecewise { c1: 2.0, c2: 0.5 }] {
            let shallow = Network::affine(1, 1, &[3.0], vec![-1.0], act).unwrap();
            let deep = Network::deep_identity(1, 4, act).unwrap();
            let p = parallel(&[&shallow, &deep]).unwrap();
            assert_eq!(p.depth(), 4);
            for &x in &[-2.0, -0.25, 0.0, 0.5, 3.0] {
                let out = p.evaluate(&[x]).unwrap();
                assert!((out[0] - (3.0 * x - 1.0)).abs() < 1e-12);
                assert!((out[1] - x).abs() < 1e-12);
            }
        }
        let s = Network::affine(1, 1, &[1.0], vec![0.0], Activation::Sigmoid).unwrap();
        let d = compose(&s, &Network::new(vec![Layer::identity(1), Layer::identity(1)], Activation::Sigmoid).unwrap()).unwrap();
        assert!(matches!(parallel(&[&s, &d]), Err(Error::Unsupported(_))));
    }

    #[test]
    fn affine_output_cases() {
        let id = Network::identity(1, Activation::ReLU);
        let n = affine_output(&id, &[2.0], -1.0).unwrap();
        assert_eq!(n.eval1(&[0.5]).unwrap(), 0.0);
        let c = affine_output(&id, &[0.0], 3.5).unwrap();
        assert_eq!(c.eval1(&[123.0]).unwrap(), 3.5);
        assert!(affine_output(&id, &[1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn clip_applies_to_output_only() {
        let n = Network::affine(1, 1, &[10.0], vec![0.0], Activation::ReLU).unwrap().with_clip(Some(2.0));
        assert_eq!(n.eval1(&[1.0]).unwrap(), 2.0);
        assert_eq!(n.eval1(&[-1.0]).unwrap(), -2.0);
        assert_eq!(n.eval1(&[0.1]).unwrap(), 1.0);
    }

    #[test]
    fn leaky_signed_identity_is_exact() {
        let act = Activation::LeakyReLU { slope: 0.2 };
        let id = Network::deep_identity(1, 2, act).unwrap();
        for &x in &[-1.7, -0.3, 0.0, 0.3, 4.1] {
            assert!((id.eval1(&[x]).unwrap() - x).abs() < 1e-15);
        }
    }
}
