//! Truncated tensor Haar series with empirical coefficients.
//!
//! Per axis the index set is the scaling function `φ = 1` plus the details
//! `ψ_{j,k}(x) = 2^{j/2} ψ(2^j x - k)`, `0 ≤ j ≤ τ`, `0 ≤ k < 2^j`: that is
//! `N = 2^{τ+1}` functions, all constant on the cells of width `1/N`.
//! Index `i = 0` is `φ`; `i ≥ 1` is `(j, k) = (⌊log₂ i⌋, i - 2^j)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcgen::{Dataset, Domain};

/// Empirical coefficients `ŵ_κ = n^{-1} Σ_i Y_i Φ_κ(X_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarSeries {
    pub dim: usize,
    pub tau: u32,
    /// Row-major `N^D` coefficient tensor.
    pub coef: Vec<f64>,
    /// Series value on each cell (synthesized from `coef`).
    #[serde(skip)]
    cells: Vec<f64>,
}

/// `(j, k)` of a one-dimensional index; `j = -1` is the scaling function.
pub fn haar_index(i: usize) -> (i32, usize) {
    if i == 0 {
        (-1, 0)
    } else {
        let j = usize::BITS - 1 - i.leading_zeros();
        (j as i32, i - (1 << j))
    }
}

/// Applies `pass` along every axis of a row-major `n^dim` tensor.
fn along_axes(data: &mut [f64], n: usize, dim: usize, pass: impl Fn(&mut [f64])) {
    let mut line = vec![0.0; n];
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let total = data.len();
        for base in 0..total {
            // visit each line once: the axis digit of `base` must be zero
            if (base / stride) % n != 0 {
                continue;
            }
            for t in 0..n {
                line[t] = data[base + t * stride];
            }
            pass(&mut line);
            for t in 0..n {
                data[base + t * stride] = line[t];
            }
        }
    }
}

/// Cell masses → `[φ, ψ_{0,0}, ψ_{1,0}, ψ_{1,1}, …]` coefficients.
fn analyze(line: &mut [f64]) {
    let n = line.len();
    let mut s = line.to_vec();
    let mut out = vec![0.0; n];
    let mut len = n;
    while len > 1 {
        let half = len / 2;
        let j = half.trailing_zeros() as i32;
        let scale = 2f64.powf(j as f64 / 2.0);
        for k in 0..half {
            out[half + k] = scale * (s[2 * k] - s[2 * k + 1]);
            s[k] = s[2 * k] + s[2 * k + 1];
        }
        len = half;
    }
    out[0] = s[0];
    line.copy_from_slice(&out);
}

/// Inverse of [`analyze`] in the sense of synthesis: coefficients → series
/// values on cells.
fn synthesize(line: &mut [f64]) {
    let n = line.len();
    let mut t = vec![line[0]];
    let mut half = 1;
    while half < n {
        let j = half.trailing_zeros() as i32;
        let scale = 2f64.powf(j as f64 / 2.0);
        let mut next = vec![0.0; 2 * half];
        for k in 0..half {
            let d = scale * line[half + k];
            next[2 * k] = t[k] + d;
            next[2 * k + 1] = t[k] - d;
        }
        t = next;
        half *= 2;
    }
    line.copy_from_slice(&t);
}

impl HaarSeries {
    pub fn per_axis(&self) -> usize {
        1 << (self.tau + 1)
    }

    fn from_coef(dim: usize, tau: u32, coef: Vec<f64>) -> Self {
        let n = 1usize << (tau + 1);
        let mut cells = coef.clone();
        along_axes(&mut cells, n, dim, synthesize);
        HaarSeries { dim, tau, coef, cells }
    }

    /// Rebuilds a series from its coefficient tensor.
    pub fn from_coefficients(dim: usize, tau: u32, coef: Vec<f64>) -> Result<Self> {
        if coef.len() != (1usize << (tau + 1)).pow(dim as u32) {
            return Err(Error::Parse(format!("expected {} Haar coefficients, got {}", (1usize << (tau + 1)).pow(dim as u32), coef.len())));
        }
        Ok(Self::from_coef(dim, tau, coef))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InputShape { expected: self.dim, got: x.len() });
        }
        if !Domain::UnitCube.contains(x) {
            return Err(Error::Domain(format!("Haar series queried outside the unit cube at {x:?}")));
        }
        let n = self.per_axis();
        let mut idx = 0;
        for &v in x {
            idx = idx * n + ((v * n as f64) as usize).min(n - 1);
        }
        Ok(self.cells[idx])
    }

    /// `Σ_κ ŵ_κ²`.
    pub fn energy(&self) -> f64 {
        self.coef.iter().map(|c| c * c).sum()
    }

    /// Coefficient at per-axis indices `idx`.
    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        let n = self.per_axis();
        self.coef[idx.iter().fold(0, |a, &i| a * n + i)]
    }
}

pub fn fit_wavelet(data: &Dataset, tau: u32) -> Result<HaarSeries> {
    if data.domain != Domain::UnitCube {
        return Err(Error::Domain("the Haar series lives on the unit cube".into()));
    }
    if data.is_empty() {
        return Err(Error::Insufficient("no training points".into()));
    }
    if tau > 24 || (1usize << (tau + 1)).checked_pow(data.dim as u32).is_none_or(|c| c > 1 << 26) {
        return invalid(format!("truncation τ={tau} gives too many coefficients in D={}", data.dim));
    }
    let dim = data.dim;
    let n_cells = 1usize << (tau + 1);
    let mut mass = vec![0.0; n_cells.pow(dim as u32)];
    let inv_n = 1.0 / data.len() as f64;
    for i in 0..data.len() {
        let mut idx = 0;
        for &v in data.point(i) {
            idx = idx * n_cells + ((v * n_cells as f64) as usize).min(n_cells - 1);
        }
        mass[idx] += data.y[i] * inv_n;
    }
    along_axes(&mut mass, n_cells, dim, analyze);
    Ok(HaarSeries::from_coef(dim, tau, mass))
}
