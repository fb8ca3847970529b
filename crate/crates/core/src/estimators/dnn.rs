//! Least-squares network fitting by full-batch gradient descent with
//! momentum.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcgen::Dataset;
use crate::network::{Activation, Layer, Network};
use crate::rng::{derive_seed, stream_rng, Stream};

/// Trainer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DnnConfig {
    /// Hidden-layer widths; the depth is `hidden.len() + 1`.
    pub hidden: Vec<usize>,
    pub act: Activation,
    /// Prediction clip `F` (outputs clamped to `[-F, F]`).
    pub clip: Option<f64>,
    pub lr: f64,
    pub momentum: f64,
    /// Iterations spent on the restart that is kept.
    pub iters: usize,
    /// Number of random initializations compared after a short pilot.
    pub restarts: usize,
    /// Pilot length for each restart.
    pub pilot_iters: usize,
    /// Loss is checked (and the iterate snapshotted) this often.
    pub checkpoint_every: usize,
    /// Stop early once the loss decrease over the last 5% of iterations
    /// falls below this (0 disables).
    pub tolerance: f64,
}

impl Default for DnnConfig {
    fn default() -> Self {
        DnnConfig {
            hidden: vec![32, 32, 32],
            act: Activation::ReLU,
            clip: Some(2.0),
            lr: 0.05,
            momentum: 0.9,
            iters: 3000,
            restarts: 5,
            pilot_iters: 200,
            checkpoint_every: 25,
            tolerance: 0.0,
        }
    }
}

impl DnnConfig {
    /// Equal hidden widths sized so the dense parameter count stays within
    /// `budget`.
    pub fn width_for_budget(dim: usize, hidden_layers: usize, budget: usize) -> usize {
        (1..=4096).take_while(|&w| dense_params(dim, &vec![w; hidden_layers]) <= budget).last().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.act.validate()?;
        if self.hidden.iter().any(|&w| w == 0) {
            return invalid("hidden widths must be positive");
        }
        if !(self.lr > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return invalid("learning rate must be positive and momentum in [0,1)");
        }
        if self.iters == 0 || self.restarts == 0 || self.checkpoint_every == 0 {
            return invalid("iteration budget, restarts and checkpoint interval must be positive");
        }
        if self.pilot_iters > self.iters {
            return invalid("pilot iterations exceed the budget");
        }
        if let Some(f) = self.clip {
            if !(f > 0.0) {
                return invalid("clip bound must be positive");
            }
        }
        Ok(())
    }
}

/// Dense parameter count of a fully connected network.
pub fn dense_params(dim: usize, hidden: &[usize]) -> usize {
    let mut prev = dim;
    let mut total = 0;
    for &w in hidden.iter().chain(std::iter::once(&1)) {
        total += w * prev + w;
        prev = w;
    }
    total
}

/// Trainer output.
#[derive(Debug, Clone, PartialEq)]
pub struct DnnFit {
    pub network: Network,
    /// Training loss of the returned iterate.
    pub loss: f64,
    /// Iterations run on the kept restart (pilot included).
    pub iterations: usize,
    /// Gap estimate: loss decrease over the last 5% of iterations.
    pub gap: f64,
    pub backtracks: usize,
    /// Index of the restart that was kept.
    pub restart: usize,
    /// `(iteration, loss)` at each accepted checkpoint; non-increasing.
    pub history: Vec<(usize, f64)>,
}

#[derive(Clone)]
struct Params {
    w: Vec<Array2<f64>>,
    b: Vec<Array1<f64>>,
}

impl Params {
    fn zeros_like(&self) -> Params {
        Params {
            w: self.w.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            b: self.b.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }
}

struct Problem<'a> {
    x: Array2<f64>,
    y: Array1<f64>,
    act: Activation,
    mean: &'a [f64],
    sd: &'a [f64],
}

fn init(dim: usize, hidden: &[usize], y_mean: f64, seed: u64) -> Params {
    let mut rng = stream_rng(seed, Stream::Init);
    let mut w = Vec::new();
    let mut b = Vec::new();
    let mut prev = dim;
    let sizes: Vec<usize> = hidden.iter().copied().chain(std::iter::once(1)).collect();
    for (i, &out) in sizes.iter().enumerate() {
        let last = i + 1 == sizes.len();
        let bound = if last { (3.0 / prev as f64).sqrt() } else { (6.0 / prev as f64).sqrt() };
        w.push(Array2::from_shape_fn((out, prev), |_| rng.random_range(-bound..bound)));
        b.push(if last { Array1::from_elem(out, y_mean) } else { Array1::zeros(out) });
        prev = out;
    }
    Params { w, b }
}

impl Problem<'_> {
    /// Loss and (optionally) gradient at `p`.
    fn eval(&self, p: &Params, grad: Option<&mut Params>) -> f64 {
        let n = self.y.len() as f64;
        let layers = p.w.len();
        let mut pre: Vec<Array2<f64>> = Vec::with_capacity(layers);
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(layers);
        let mut a = self.x.clone();
        for l in 0..layers {
            let mut z = a.dot(&p.w[l].t());
            z += &p.b[l];
            if l + 1 < layers {
                let act = self.act;
                let h = z.mapv(|v| act.apply(v));
                post.push(std::mem::replace(&mut a, h));
                pre.push(z);
            } else {
                post.push(a.clone());
                pre.push(z);
            }
        }
        let out = pre[layers - 1].column(0);
        let resid: Array1<f64> = &out - &self.y;
        let loss = resid.dot(&resid) / n;
        if let Some(g) = grad {
            let mut delta = (resid * (2.0 / n)).insert_axis(Axis(1));
            for l in (0..layers).rev() {
                g.w[l] = delta.t().dot(&post[l]);
                g.b[l] = delta.sum_axis(Axis(0));
                if l > 0 {
                    let act = self.act;
                    let mut back = delta.dot(&p.w[l]);
                    back.zip_mut_with(&pre[l - 1], |d, &z| *d *= act.grad(z));
                    delta = back;
                }
            }
        }
        loss
    }

    fn to_network(&self, p: &Params, clip: Option<f64>) -> Result<Network> {
        let mut layers = Vec::with_capacity(p.w.len());
        for (l, (w, b)) in p.w.iter().zip(&p.b).enumerate() {
            let (rows, cols) = w.dim();
            let mut dense: Vec<f64> = w.iter().copied().collect();
            let mut bias = b.to_vec();
            if l == 0 {
                // fold the input standardization x ↦ (x - mean)/sd
                for r in 0..rows {
                    for c in 0..cols {
                        let v = dense[r * cols + c] / self.sd[c];
                        dense[r * cols + c] = v;
                        bias[r] -= v * self.mean[c];
                    }
                }
            }
            layers.push(Layer::from_dense(rows, cols, &dense, bias)?);
        }
        Ok(Network::new(layers, self.act)?.with_clip(clip))
    }
}

struct Run {
    params: Params,
    loss: f64,
    history: Vec<(usize, f64)>,
    backtracks: usize,
    iterations: usize,
}

/// Gradient descent with heavy-ball momentum and checkpoint backtracking:
/// if the loss at a checkpoint exceeds the previous checkpoint's, the
/// iterate is rolled back and the step halved.
fn descend(prob: &Problem, cfg: &DnnConfig, start: Params, iters: usize, mut run: Run) -> Result<Run> {
    let mut p = start;
    let mut vel = p.zeros_like();
    let mut grad = p.zeros_like();
    let mut lr = cfg.lr * 0.5f64.powi(run.backtracks as i32);
    let floor = cfg.lr * 1e-6;
    let mut ck = (p.clone(), run.loss);
    let base = run.iterations;
    for it in 0..iters {
        let loss = prob.eval(&p, Some(&mut grad));
        if !loss.is_finite() {
            return Err(Error::Divergence {
                message: format!("non-finite training loss at iteration {}", base + it),
                last_stable: Box::new(prob.to_network(&ck.0, cfg.clip)?),
            });
        }
        if it % cfg.checkpoint_every == 0 && it > 0 {
            if loss <= ck.1 {
                ck = (p.clone(), loss);
                run.history.push((base + it, loss));
                if cfg.tolerance > 0.0 && stalled(&run.history, base + it, cfg.tolerance) {
                    run.iterations = base + it;
                    break;
                }
            } else {
                p = ck.0.clone();
                vel = p.zeros_like();
                lr *= 0.5;
                run.backtracks += 1;
                if lr < floor {
                    run.iterations = base + it;
                    break;
                }
                continue;
            }
        }
        for l in 0..p.w.len() {
            vel.w[l] *= cfg.momentum;
            vel.w[l].scaled_add(-lr, &grad.w[l]);
            p.w[l] += &vel.w[l];
            vel.b[l] *= cfg.momentum;
            vel.b[l].scaled_add(-lr, &grad.b[l]);
            p.b[l] += &vel.b[l];
        }
        run.iterations = base + it + 1;
    }
    let last = prob.eval(&p, None);
    if last.is_finite() && last <= ck.1 {
        ck = (p, last);
        run.history.push((run.iterations, last));
    }
    run.params = ck.0;
    run.loss = ck.1;
    Ok(run)
}

fn stalled(history: &[(usize, f64)], now: usize, tol: f64) -> bool {
    let back = now - now / 20;
    match history.iter().find(|&&(i, _)| i >= back) {
        Some(&(_, l)) => l - history.last().unwrap().1 < tol && now >= 100,
        None => false,
    }
}

/// Loss decrease over the last 5% of recorded iterations.
fn gap(history: &[(usize, f64)], total: usize) -> f64 {
    let back = total - total / 20;
    let before = history.iter().rev().find(|&&(i, _)| i <= back).or(history.first());
    match (before, history.last()) {
        (Some(a), Some(b)) => (a.1 - b.1).max(0.0),
        _ => 0.0,
    }
}

/// Fits a network by least squares. Each of `restarts` initializations runs
/// for `pilot_iters`; the one with the lowest loss continues for the rest of
/// the budget.
pub fn fit_dnn(data: &Dataset, cfg: &DnnConfig, seed: u64) -> Result<DnnFit> {
    cfg.validate()?;
    let n = data.len();
    if n == 0 {
        return Err(Error::Insufficient("no training points".into()));
    }
    let dim = data.dim;
    let x = Array2::from_shape_vec((n, dim), data.x.clone()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mean: Vec<f64> = (0..dim).map(|d| x.column(d).mean().unwrap()).collect();
    let sd: Vec<f64> = (0..dim)
        .map(|d| {
            let s = x.column(d).std(0.0);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut xs = x;
    for d in 0..dim {
        xs.column_mut(d).mapv_inplace(|v| (v - mean[d]) / sd[d]);
    }
    let y = Array1::from_vec(data.y.clone());
    let y_mean = y.mean().unwrap();
    let prob = Problem { x: xs, y, act: cfg.act, mean: &mean, sd: &sd };

    let mut best: Option<(usize, Run)> = None;
    for r in 0..cfg.restarts {
        let p = init(dim, &cfg.hidden, y_mean, derive_seed(seed, &[r as u64]));
        let loss = prob.eval(&p, None);
        let run = Run { params: p.clone(), loss, history: vec![(0, loss)], backtracks: 0, iterations: 0 };
        let run = descend(&prob, cfg, p, cfg.pilot_iters, run)?;
        if best.as_ref().is_none_or(|(_, b)| run.loss < b.loss) {
            best = Some((r, run));
        }
    }
    let (restart, run) = best.unwrap();
    let start = run.params.clone();
    let rest = cfg.iters - cfg.pilot_iters;
    let run = if rest > 0 { descend(&prob, cfg, start, rest, run)? } else { run };
    let network = prob.to_network(&run.params, cfg.clip)?;
    Ok(DnnFit {
        network,
        loss: run.loss,
        iterations: run.iterations,
        gap: gap(&run.history, run.iterations),
        backtracks: run.backtracks,
        restart,
        history: run.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgen::{gen_dataset, Domain, HolderFn};

    fn small() -> DnnConfig {
        DnnConfig { hidden: vec![8, 8], iters: 400, pilot_iters: 50, restarts: 2, ..DnnConfig::default() }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let f = HolderFn::sine(2, 2.0, 0.0, 1.0, 1.0, 0);
        let d = gen_dataset(&f, 40, 0.1, 3, Domain::UnitCube).unwrap();
        let x = Array2::from_shape_vec((40, 2), d.x.clone()).unwrap();
        for act in [Activation::Swish, Activation::LeakyReLU { slope: 0.3 }] {
            let prob = Problem { x: x.clone(), y: Array1::from_vec(d.y.clone()), act, mean: &[0.0, 0.0], sd: &[1.0, 1.0] };
            let p = init(2, &[5, 4], 0.0, 11);
            let mut g = p.zeros_like();
            prob.eval(&p, Some(&mut g));
            let h = 1e-6;
            for l in 0..p.w.len() {
                for idx in [(0, 0), (0, 1)] {
                    let mut a = p.clone();
                    let mut b = p.clone();
                    a.w[l][idx] += h;
                    b.w[l][idx] -= h;
                    let fd = (prob.eval(&a, None) - prob.eval(&b, None)) / (2.0 * h);
                    assert!((fd - g.w[l][idx]).abs() < 1e-6 * (1.0 + fd.abs()), "{act:?} layer {l}: {fd} vs {}", g.w[l][idx]);
                }
            }
        }
    }

    #[test]
    fn constant_target_is_fitted() {
        let f = HolderFn::constant(2, 0.7);
        let d = gen_dataset(&f, 64, 0.0, 1, Domain::UnitCube).unwrap();
        let fit = fit_dnn(&d, &small(), 5).unwrap();
        assert!(fit.loss <= 1e-6, "{}", fit.loss);
    }

    #[test]
    fn deterministic_and_monotone() {
        let f = HolderFn::sine(2, 2.0, 0.0, 1.0, 1.0, 0);
        let d = gen_dataset(&f, 128, 0.1, 2, Domain::UnitCube).unwrap();
        let a = fit_dnn(&d, &small(), 9).unwrap();
        let b = fit_dnn(&d, &small(), 9).unwrap();
        assert_eq!(a.network, b.network);
        assert!(a.history.windows(2).all(|w| w[1].1 <= w[0].1));
    }

    #[test]
    fn divergence_returns_last_stable() {
        let f = HolderFn::sine(2, 2.0, 0.0, 1.0, 1.0, 0);
        let d = gen_dataset(&f, 64, 0.1, 2, Domain::UnitCube).unwrap();
        let cfg = DnnConfig { lr: 1e12, ..small() };
        match fit_dnn(&d, &cfg, 1) {
            Err(Error::Divergence { last_stable, .. }) => assert_eq!(last_stable.input_width(), 2),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn width_budget() {
        let w = DnnConfig::width_for_budget(2, 3, 2000);
        assert!(dense_params(2, &[w; 3]) <= 2000);
        assert!(dense_params(2, &[w + 1; 3]) > 2000);
    }
}
