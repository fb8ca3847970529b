//! Kernel ridge regression with a Gaussian kernel.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::funcgen::Dataset;

/// `k(x, y) = exp(-‖x - y‖² / (2h²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    pub bandwidth: f64,
}

impl GaussianKernel {
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-d2 / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }
}

/// Fitted dual representation `x ↦ Σ_i a_i k(x, X_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRidge {
    pub kernel: GaussianKernel,
    pub lambda: f64,
    pub dim: usize,
    /// Row-major stored design.
    pub design: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gram matrix `K_ij = k(X_i, X_j)`.
fn gram(data: &Dataset, kernel: GaussianKernel) -> Mat<f64> {
    let n = data.len();
    let mut k = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        let xj = data.point(j);
        for i in j..n {
            let v = kernel.eval(data.point(i), xj);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Precomputed Gram matrix for refitting one design with several ridges.
pub struct GramCache {
    kernel: GaussianKernel,
    k: Mat<f64>,
}

impl GramCache {
    pub fn new(data: &Dataset, kernel: GaussianKernel) -> Self {
        GramCache { kernel, k: gram(data, kernel) }
    }

    /// `a = (K + nλI)^{-1} Y`.
    pub fn fit(&self, data: &Dataset, lambda: f64) -> Result<KernelRidge> {
        if !(lambda > 0.0) {
            return invalid(format!("ridge λ must be positive, got {lambda}"));
        }
        let n = data.len();
        let mut a = self.k.clone();
        for i in 0..n {
            a[(i, i)] += n as f64 * lambda;
        }
        let llt = a.llt(Side::Lower).map_err(|e| Error::Numerical(format!("Cholesky failed: {e:?}")))?;
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| data.y[i]);
        let sol = llt.solve(&rhs);
        Ok(KernelRidge {
            kernel: self.kernel,
            lambda,
            dim: data.dim,
            design: data.x.clone(),
            weights: (0..n).map(|i| sol[(i, 0)]).collect(),
        })
    }
}

pub fn fit_kernel_ridge(data: &Dataset, bandwidth: f64, lambda: f64) -> Result<KernelRidge> {
    if !(bandwidth > 0.0) {
        return invalid("kernel bandwidth must be positive");
    }
    if data.is_empty() {
        return Err(Error::Insufficient("no training points".into()));
    }
    if !(lambda > 0.0) {
        return invalid(format!("ridge λ must be positive, got {lambda}"));
    }
    GramCache::new(data, GaussianKernel { bandwidth }).fit(data, lambda)
}

impl KernelRidge {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.design.chunks(self.dim).zip(&self.weights).map(|(xi, a)| a * self.kernel.eval(x, xi)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgen::{gen_dataset, Domain, HolderFn};

    #[test]
    fn single_point_interpolates() {
        let d = Dataset {
            dim: 2,
            x: vec![0.3, 0.6],
            y: vec![1.7],
            sigma: 0.0,
            seed: 0,
            domain: Domain::UnitCube,
            target: "point".into(),
        };
        let k = fit_kernel_ridge(&d, 0.5, 1e-10).unwrap();
        assert!((k.predict(&[0.3, 0.6]) - 1.7).abs() < 1e-8);
    }

    #[test]
    fn constant_response_is_recovered() {
        let f = HolderFn::constant(2, 0.8);
        let d = gen_dataset(&f, 32, 0.0, 4, Domain::UnitCube).unwrap();
        let k = fit_kernel_ridge(&d, 2.0, 1e-9).unwrap();
        for p in [[0.5, 0.5], [0.2, 0.7], [0.8, 0.3]] {
            assert!((k.predict(&p) - 0.8).abs() < 1e-3, "{}", k.predict(&p));
        }
    }

    #[test]
    fn rejects_nonpositive_ridge() {
        let f = HolderFn::constant(1, 0.8);
        let d = gen_dataset(&f, 8, 0.0, 4, Domain::UnitCube).unwrap();
        assert!(fit_kernel_ridge(&d, 0.2, 0.0).is_err());
    }
}
