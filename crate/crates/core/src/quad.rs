//! Deterministic quadrature: Halton quasi-Monte-Carlo and composite Simpson.

use rayon::prelude::*;

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const SHARD: usize = 4096;

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// First `n` Halton points in `[0,1)^dim` (skipping the origin), row-major.
pub fn halton(n: usize, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "Halton supports up to {} dimensions", PRIMES.len());
    let mut out = Vec::with_capacity(n * dim);
    for i in 1..=n as u64 {
        for &p in &PRIMES[..dim] {
            out.push(radical_inverse(i, p));
        }
    }
    out
}

/// Halton points mapped affinely onto `[lo, hi]^dim`.
pub fn halton_box(n: usize, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut p = halton(n, dim);
    for v in &mut p {
        *v = lo + (hi - lo) * *v;
    }
    p
}

/// Mean of `f` over the rows of a point array. Shards of fixed size are
/// reduced independently (possibly in parallel) and then summed in shard
/// order, so the result does not depend on the worker count.
pub fn shard_mean<F>(points: &[f64], dim: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = points.len() / dim;
    if n == 0 {
        return 0.0;
    }
    let sums: Vec<f64> = points
        .par_chunks(SHARD * dim)
        .map(|chunk| pairwise_sum(&chunk.chunks(dim).map(&f).collect::<Vec<_>>()))
        .collect();
    pairwise_sum(&sums) / n as f64
}

/// Like [`shard_mean`] but `f` handles a whole shard at once (for
/// evaluators with per-call setup such as network scratch buffers).
pub fn shard_mean_batched<F>(points: &[f64], dim: usize, f: F) -> f64
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let n = points.len() / dim;
    if n == 0 {
        return 0.0;
    }
    let sums: Vec<f64> = points.par_chunks(SHARD * dim).map(|chunk| pairwise_sum(&f(chunk))).collect();
    pairwise_sum(&sums) / n as f64
}

pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Composite Simpson rule with `panels` (rounded up to even) on `[a, b]`.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        let p = halton(3, 2);
        assert_eq!(p, vec![0.5, 1.0 / 3.0, 0.25, 2.0 / 3.0, 0.75, 1.0 / 9.0]);
    }

    #[test]
    fn qmc_integrates_polynomial() {
        let p = halton(1 << 14, 2);
        let m = shard_mean(&p, 2, |x| x[0] * x[1]);
        assert!((m - 0.25).abs() < 1e-3);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x, -1.0, 2.0, 10);
        assert!((v - (15.0 / 4.0 - 3.0)).abs() < 1e-12);
    }
}
