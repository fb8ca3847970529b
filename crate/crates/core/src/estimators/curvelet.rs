//! Discrete curvelet series on `[-1, 1]²`.
//!
//! Functions are expanded in the Fourier basis `e^{iπ ξ·x}`, `ξ ∈ Z²`. The
//! frequency plane is tiled by polar windows `χ_{j,ℓ}` whose squares sum to
//! one on the disk `‖ξ‖ ≤ 4^τ`:
//!
//! * radial: with `ρ = log₂‖ξ‖` and the C² blender `β_M`, let
//!   `u_j(ρ) = β_M(ρ - 2j + 2)` (rising on `[2j-2, 2j-1]`) and
//!   `W_j² = u_j - u_{j+1}`; scale `j` lives on `2^{2j-2} ≤ ‖ξ‖ ≤ 2^{2j+1}`,
//!   and the low-pass `W_{-1}² = 1 - u_0` keeps only `ξ = 0`;
//! * angular: `2^{j+1}` wedges over `θ mod π` with
//!   `V(s) = cos(π/2 · β_M(|s|))`, so `Σ_ℓ V² = 1` and every window is even
//!   in `ξ` (real curvelets).
//!
//! Each window is translated over an `M₁ × M₂` lattice
//! `x_k = (-1 + 2k₁/M₁, -1 + 2k₂/M₂)` with `M_a` at least the support width
//! of the window along axis `a`, which makes
//! `γ_{j,ℓ,k}(x) = Z^{-1} Σ_ξ χ_{j,ℓ}(ξ) e^{iπ ξ·(x - x_k)}`, `Z = 2√(M₁M₂)`,
//! a tight frame for band-limited functions in `L²([-1,1]²)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcgen::{Dataset, Domain};

/// C² blender: `β(0) = 0`, `β(1) = 1`, `β(t) + β(1 - t) = 1`.
pub fn blend(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

fn radial_rise(j: i32, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    blend(r.log2() - (2 * j - 2) as f64)
}

/// `W_j(‖ξ‖)`; `j = -1` is the low-pass window.
pub fn radial_window(j: i32, r: f64) -> f64 {
    let sq = if j < 0 { 1.0 - radial_rise(0, r) } else { radial_rise(j, r) - radial_rise(j + 1, r) };
    sq.max(0.0).sqrt()
}

/// Number of angular wedges at scale `j`.
pub fn wedges_at(j: i32) -> usize {
    if j < 0 {
        1
    } else {
        2 << j
    }
}

/// `V_{j,ℓ}(θ)` for `θ` taken modulo `π`.
pub fn angular_window(j: i32, l: usize, theta: f64) -> f64 {
    if j < 0 {
        return 1.0;
    }
    let a = wedges_at(j) as f64;
    let t = theta.rem_euclid(PI);
    let mut s = a * t / PI - l as f64;
    s -= a * (s / a).round();
    if s.abs() >= 1.0 {
        0.0
    } else {
        (PI / 2.0 * blend(s.abs())).cos()
    }
}

/// `χ_{j,ℓ}(ξ)`.
pub fn window(j: i32, l: usize, xi: [i64; 2]) -> f64 {
    let r = ((xi[0] * xi[0] + xi[1] * xi[1]) as f64).sqrt();
    let w = radial_window(j, r);
    if w == 0.0 || j < 0 {
        return w;
    }
    // the upper half-plane representative makes the window exactly even
    let h = if xi[1] < 0 || (xi[1] == 0 && xi[0] < 0) { [-xi[0], -xi[1]] } else { xi };
    w * angular_window(j, l, (h[1] as f64).atan2(h[0] as f64))
}

/// Hyper-parameters of the curvelet series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveletConfig {
    pub tau: u32,
    /// Frequency grid size `N`; the band edge `2^{2τ+1}` must not exceed `N/2`.
    pub grid: usize,
    /// Location spacings as fractions of the critical lattice spacing, in `(0, 1]`.
    pub delta1: f64,
    pub delta2: f64,
}

impl Default for CurveletConfig {
    fn default() -> Self {
        CurveletConfig { tau: 2, grid: 256, delta1: 1.0, delta2: 1.0 }
    }
}

impl CurveletConfig {
    /// Band edge `R = 2^{2τ+1}`.
    pub fn band(&self) -> i64 {
        1i64 << (2 * self.tau + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau > 6 {
            return Err(Error::Config(format!("curvelet truncation τ={} is beyond desk scale (τ ≤ 6)", self.tau)));
        }
        if self.band() as f64 > self.grid as f64 / 2.0 {
            return Err(Error::Config(format!(
                "frequency grid N={} too small for τ={}: band edge {} exceeds the Nyquist limit {}",
                self.grid,
                self.tau,
                self.band(),
                self.grid / 2
            )));
        }
        for d in [self.delta1, self.delta2] {
            if !(d > 0.0 && d <= 1.0) {
                return Err(Error::Config(format!("curvelet location spacing must lie in (0, 1], got {d}")));
            }
        }
        Ok(())
    }
}

/// One window `χ_{j,ℓ}` with its translation lattice and coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Wedge {
    pub scale: i32,
    pub angle: usize,
    pub lattice: [usize; 2],
    /// `ŵ_{j,ℓ,k}` at `k = (k₁, k₂)`, row-major over `k₁`.
    pub coef: Vec<f64>,
    support: Vec<([i64; 2], f64)>,
}

impl Wedge {
    fn norm(&self) -> f64 {
        2.0 * ((self.lattice[0] * self.lattice[1]) as f64).sqrt()
    }

    fn slot(&self, xi: [i64; 2]) -> usize {
        let m = self.lattice;
        xi[0].rem_euclid(m[0] as i64) as usize * m[1] + xi[1].rem_euclid(m[1] as i64) as usize
    }
}

fn sign(xi: [i64; 2]) -> f64 {
    if (xi[0] + xi[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn fft2(buf: &mut [Complex64], m: [usize; 2], planner: &mut FftPlanner<f64>) {
    let rows = planner.plan_fft_forward(m[1]);
    for row in buf.chunks_mut(m[1]) {
        rows.process(row);
    }
    let cols = planner.plan_fft_forward(m[0]);
    let mut col = vec![Complex64::new(0.0, 0.0); m[0]];
    for c in 0..m[1] {
        for r in 0..m[0] {
            col[r] = buf[r * m[1] + c];
        }
        cols.process(&mut col);
        for r in 0..m[0] {
            buf[r * m[1] + c] = col[r];
        }
    }
}

/// Fitted curvelet series; prediction uses the synthesized spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveletSeries {
    pub config: CurveletConfig,
    pub wedges: Vec<Wedge>,
    /// `G(ξ)` on the box `|ξ|_∞ ≤ R`, row-major over `ξ₁`.
    spectrum: Vec<Complex64>,
}

/// Empty wedges (zero coefficients) for the configuration's tiling.
fn tiling(cfg: &CurveletConfig) -> Vec<Wedge> {
    let r = cfg.band();
    let mut out = Vec::new();
    for j in -1..=cfg.tau as i32 {
        for l in 0..wedges_at(j) {
            let mut support = Vec::new();
            let (mut lo, mut hi) = ([i64::MAX; 2], [i64::MIN; 2]);
            for a in -r..=r {
                for b in -r..=r {
                    let w = window(j, l, [a, b]);
                    if w > 0.0 {
                        support.push(([a, b], w));
                        lo = [lo[0].min(a), lo[1].min(b)];
                        hi = [hi[0].max(a), hi[1].max(b)];
                    }
                }
            }
            if support.is_empty() {
                continue;
            }
            let width = [(hi[0] - lo[0] + 1) as f64, (hi[1] - lo[1] + 1) as f64];
            let lattice = [(width[0] / cfg.delta1).ceil() as usize, (width[1] / cfg.delta2).ceil() as usize];
            let coef = vec![0.0; lattice[0] * lattice[1]];
            out.push(Wedge { scale: j, angle: l, lattice, coef, support });
        }
    }
    out
}

impl CurveletSeries {
    /// Coefficients `ŵ_μ = Z^{-1} Σ_ξ χ_μ(ξ) A(ξ) e^{-iπ ξ·x_k}` from a
    /// spectrum `A(ξ) = E[Y e^{iπ ξ·X}]` (empirical or population).
    pub fn from_spectrum(cfg: CurveletConfig, spectrum: impl Fn([i64; 2]) -> Complex64) -> Result<Self> {
        cfg.validate()?;
        let mut wedges = tiling(&cfg);
        let mut planner = FftPlanner::new();
        for w in &mut wedges {
            let mut buf = vec![Complex64::new(0.0, 0.0); w.coef.len()];
            for &(xi, chi) in &w.support {
                buf[w.slot(xi)] += spectrum(xi) * (chi * sign(xi));
            }
            fft2(&mut buf, w.lattice, &mut planner);
            let z = w.norm();
            for (c, b) in w.coef.iter_mut().zip(&buf) {
                *c = b.re / z;
            }
        }
        Ok(Self::assemble(cfg, wedges))
    }

    /// Rebuilds a series from stored coefficients (one vector per wedge, in
    /// tiling order).
    pub fn from_coefficients(cfg: CurveletConfig, coef: Vec<Vec<f64>>) -> Result<Self> {
        cfg.validate()?;
        let mut wedges = tiling(&cfg);
        if coef.len() != wedges.len() {
            return Err(Error::Parse(format!("expected {} curvelet wedges, got {}", wedges.len(), coef.len())));
        }
        for (w, c) in wedges.iter_mut().zip(coef) {
            if c.len() != w.coef.len() {
                return Err(Error::Parse(format!("wedge ({}, {}) expects {} coefficients, got {}", w.scale, w.angle, w.coef.len(), c.len())));
            }
            w.coef = c;
        }
        Ok(Self::assemble(cfg, wedges))
    }

    fn assemble(config: CurveletConfig, wedges: Vec<Wedge>) -> Self {
        let r = config.band();
        let k = (2 * r + 1) as usize;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); k * k];
        let mut planner = FftPlanner::new();
        for w in &wedges {
            let mut buf: Vec<Complex64> = w.coef.iter().map(|&c| Complex64::new(c, 0.0)).collect();
            fft2(&mut buf, w.lattice, &mut planner);
            let z = w.norm();
            for &(xi, chi) in &w.support {
                let idx = (xi[0] + r) as usize * k + (xi[1] + r) as usize;
                spectrum[idx] += buf[w.slot(xi)] * (chi * sign(xi) / z);
            }
        }
        CurveletSeries { config, wedges, spectrum }
    }

    pub fn num_coefficients(&self) -> usize {
        self.wedges.iter().map(|w| w.coef.len()).sum()
    }

    /// `f̂(x) = 4 Σ_μ ŵ_μ γ_μ(x)`; the factor 4 undoes the uniform density on `[-1,1]²`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != 2 {
            return Err(Error::InputShape { expected: 2, got: x.len() });
        }
        if !Domain::Symmetric.contains(x) {
            return Err(Error::Domain(format!("curvelet series queried outside [-1,1]² at {x:?}")));
        }
        let r = self.config.band();
        let u1 = phases(r, x[0]);
        let u2 = phases(r, x[1]);
        let k = u1.len();
        let mut total = Complex64::new(0.0, 0.0);
        for (a, row) in self.spectrum.chunks(k).enumerate() {
            let inner: Complex64 = row.iter().zip(&u2).map(|(g, u)| g * u).sum();
            total += u1[a] * inner;
        }
        Ok(4.0 * total.re)
    }
}

/// `e^{iπ m t}` for `m = -R..=R`.
fn phases(r: i64, t: f64) -> Vec<Complex64> {
    (-r..=r).map(|m| Complex64::cis(PI * m as f64 * t)).collect()
}

/// Empirical spectrum `A(ξ) = n^{-1} Σ_i Y_i e^{iπ ξ·X_i}` on the band box.
fn empirical_spectrum(data: &Dataset, r: i64) -> Vec<Complex64> {
    let k = (2 * r + 1) as usize;
    let mut spec = vec![Complex64::new(0.0, 0.0); k * k];
    let inv_n = 1.0 / data.len() as f64;
    for i in 0..data.len() {
        let p = data.point(i);
        let u1 = phases(r, p[0]);
        let u2 = phases(r, p[1]);
        let y = data.y[i] * inv_n;
        for (a, row) in spec.chunks_mut(k).enumerate() {
            let ya = u1[a] * y;
            for (s, u) in row.iter_mut().zip(&u2) {
                *s += ya * u;
            }
        }
    }
    spec
}

pub fn fit_curvelet(data: &Dataset, cfg: CurveletConfig) -> Result<CurveletSeries> {
    cfg.validate()?;
    if data.dim != 2 {
        return invalid(format!("the curvelet series is two-dimensional, got D={}", data.dim));
    }
    if data.domain != Domain::Symmetric {
        return Err(Error::Domain("the curvelet series lives on [-1,1]²".into()));
    }
    if data.is_empty() {
        return Err(Error::Insufficient("no training points".into()));
    }
    let r = cfg.band();
    let k = (2 * r + 1) as usize;
    let spec = empirical_spectrum(data, r);
    CurveletSeries::from_spectrum(cfg, |xi| spec[(xi[0] + r) as usize * k + (xi[1] + r) as usize])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::halton_box;

    #[test]
    fn windows_partition_the_band() {
        let cfg = CurveletConfig { tau: 3, ..Default::default() };
        let edge = 1i64 << (2 * cfg.tau);
        for a in -edge..=edge {
            for b in [-edge, -7, 0, 3, 40, edge] {
                if a * a + b * b > edge * edge {
                    continue;
                }
                let mut s = 0.0;
                for j in -1..=cfg.tau as i32 {
                    for l in 0..wedges_at(j) {
                        s += window(j, l, [a, b]).powi(2);
                    }
                }
                assert!((s - 1.0).abs() < 1e-12, "ξ=({a},{b}): {s}");
            }
        }
    }

    #[test]
    fn windows_are_even() {
        for j in 0..3 {
            for l in 0..wedges_at(j) {
                for xi in [[3, 1], [-5, 2], [7, -9], [0, 4]] {
                    assert_eq!(window(j, l, xi), window(j, l, [-xi[0], -xi[1]]));
                }
            }
        }
    }

    #[test]
    fn nyquist_is_enforced() {
        let cfg = CurveletConfig { tau: 4, grid: 256, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        assert!(CurveletConfig { tau: 3, grid: 256, ..Default::default() }.validate().is_ok());
    }

    /// `f(x) = Σ a cos(π ξ·x) + b sin(π ξ·x)`, band-limited to `‖ξ‖ ≤ 4^τ`.
    fn trig_terms() -> Vec<([i64; 2], f64, f64)> {
        vec![([0, 0], 0.3, 0.0), ([1, 0], 0.5, -0.2), ([2, 3], -0.4, 0.25), ([7, -5], 0.2, 0.1), ([30, 41], 0.05, -0.08)]
    }

    fn trig_eval(x: &[f64]) -> f64 {
        trig_terms().iter().map(|(xi, a, b)| {
            let t = PI * (xi[0] as f64 * x[0] + xi[1] as f64 * x[1]);
            a * t.cos() + b * t.sin()
        }).sum()
    }

    /// `E[f(X) e^{iπξ·X}]` under the uniform law on `[-1,1]²`.
    fn trig_spectrum(xi: [i64; 2]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (z, a, b) in trig_terms() {
            // a cos + b sin = (a - ib)/2 e^{iπz·x} + (a + ib)/2 e^{-iπz·x}
            if z == [0, 0] {
                if xi == [0, 0] {
                    s += a;
                }
                continue;
            }
            if xi == [-z[0], -z[1]] {
                s += Complex64::new(a, -b) / 2.0;
            }
            if xi == z {
                s += Complex64::new(a, b) / 2.0;
            }
        }
        s
    }

    #[test]
    fn tight_frame_round_trip() {
        let cfg = CurveletConfig { tau: 3, ..Default::default() };
        let c = CurveletSeries::from_spectrum(cfg, trig_spectrum).unwrap();
        let pts = halton_box(2048, 2, -1.0, 1.0);
        let (mut num, mut den) = (0.0, 0.0);
        for p in pts.chunks(2) {
            let f = trig_eval(p);
            num += (c.predict(p).unwrap() - f).powi(2);
            den += f * f;
        }
        assert!((num / den).sqrt() < 1e-9, "relative error {}", (num / den).sqrt());
    }

    #[test]
    fn zero_response_gives_zero_series() {
        let x = halton_box(32, 2, -1.0, 1.0);
        let d = Dataset { dim: 2, x, y: vec![0.0; 32], sigma: 0.0, seed: 0, domain: Domain::Symmetric, target: "zero".into() };
        let c = fit_curvelet(&d, CurveletConfig { tau: 1, ..Default::default() }).unwrap();
        assert!(c.wedges.iter().all(|w| w.coef.iter().all(|&v| v == 0.0)));
        assert_eq!(c.predict(&[0.2, -0.4]).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let x = halton_box(8, 2, 0.0, 1.0);
        let d = Dataset { dim: 2, x, y: vec![1.0; 8], sigma: 0.0, seed: 0, domain: Domain::UnitCube, target: "c".into() };
        assert!(matches!(fit_curvelet(&d, CurveletConfig::default()), Err(Error::Domain(_))));
        let d = Dataset { domain: Domain::Symmetric, ..d };
        let c = fit_curvelet(&d, CurveletConfig { tau: 0, ..Default::default() }).unwrap();
        assert!(matches!(c.predict(&[1.2, 0.0]), Err(Error::Domain(_))));
    }
}
