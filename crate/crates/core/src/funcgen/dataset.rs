use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Domain, Target};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// `n` pairs `(X_i, Y_i)` with `X_i` uniform on the domain and
/// `Y_i = f*(X_i) + ξ_i`, `ξ_i ~ N(0, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    /// Row-major `n × dim`.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: f64,
    pub seed: u64,
    pub domain: Domain,
    pub target: String,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format: String,
    n: usize,
    dim: usize,
    sigma: f64,
    seed: u64,
    domain: Domain,
    target: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// Same design, responses replaced.
    pub fn with_y(&self, y: Vec<f64>) -> Dataset {
        assert_eq!(y.len(), self.len());
        Dataset { y, ..self.clone() }
    }

    /// Writes `stem.csv` (columns `x_1..x_D, y`) and `stem.json`.
    pub fn save(&self, stem: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(stem.with_extension("csv"))?);
        let header: Vec<String> = (1..=self.dim).map(|d| format!("x_{d}")).chain(std::iter::once("y".to_string())).collect();
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.len() {
            let row: Vec<String> = self.point(i).iter().chain(std::iter::once(&self.y[i])).map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        let side = Sidecar {
            format: "singlab-dataset".into(),
            n: self.len(),
            dim: self.dim,
            sigma: self.sigma,
            seed: self.seed,
            domain: self.domain,
            target: self.target.clone(),
        };
        std::fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Dataset> {
        let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
        let text = std::fs::read_to_string(stem.with_extension("csv"))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty dataset CSV".into()))?;
        if header.split(',').count() != side.dim + 1 {
            return Err(Error::Parse(format!("dataset header has wrong column count: '{header}'")));
        }
        let mut x = Vec::with_capacity(side.n * side.dim);
        let mut y = Vec::with_capacity(side.n);
        for (ln, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("dataset line {}: {e}", ln + 2)))?;
            if vals.len() != side.dim + 1 {
                return Err(Error::Parse(format!("dataset line {}: expected {} columns", ln + 2, side.dim + 1)));
            }
            x.extend_from_slice(&vals[..side.dim]);
            y.push(vals[side.dim]);
        }
        if y.len() != side.n {
            return Err(Error::Parse(format!("sidecar says n={} but CSV has {} rows", side.n, y.len())));
        }
        Ok(Dataset { dim: side.dim, x, y, sigma: side.sigma, seed: side.seed, domain: side.domain, target: side.target })
    }
}

/// Draws a dataset. The design comes from the seed's design stream and the
/// noise from its noise stream, so the same seed gives the same `X` for any
/// `σ`.
pub fn gen_dataset(f: &dyn Target, n: usize, sigma: f64, seed: u64, domain: Domain) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter("sigma must be non-negative".into()));
    }
    let dim = f.dim();
    let (lo, hi) = domain.bounds();
    let mut design = stream_rng(seed, Stream::Design);
    let mut noise = stream_rng(seed, Stream::Noise);
    let x: Vec<f64> = (0..n * dim).map(|_| lo + (hi - lo) * design.random::<f64>()).collect();
    let y = x
        .chunks(dim.max(1))
        .take(n)
        .map(|p| {
            let xi: f64 = noise.sample(StandardNormal);
            f.eval(if dim == 0 { &[] } else { p }) + sigma * xi
        })
        .collect();
    Ok(Dataset { dim, x, y, sigma, seed, domain, target: f.describe() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgen::named_target;

    #[test]
    fn noiseless_and_reproducible() {
        let f = named_target("rectangle").unwrap();
        let a = gen_dataset(&f, 100, 0.0, 5, Domain::UnitCube).unwrap();
        for i in 0..100 {
            assert_eq!(a.y[i], f.eval(a.point(i)));
        }
        let b = gen_dataset(&f, 100, 0.0, 5, Domain::UnitCube).unwrap();
        assert_eq!(a, b);
        let c = gen_dataset(&f, 100, 0.3, 5, Domain::UnitCube).unwrap();
        assert_eq!(a.x, c.x);
    }

    #[test]
    fn residual_std_close_to_sigma() {
        let f = named_target("graph-indicator").unwrap();
        let d = gen_dataset(&f, 4096, 0.1, 17, Domain::UnitCube).unwrap();
        let r: Vec<f64> = (0..d.len()).map(|i| d.y[i] - f.eval(d.point(i))).collect();
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
        assert!((0.097..=0.103).contains(&sd), "sd = {sd}");
    }

    #[test]
    fn csv_round_trip() {
        let f = named_target("quadrant").unwrap();
        let d = gen_dataset(&f, 50, 0.2, 3, Domain::Symmetric).unwrap();
        let dir = std::env::temp_dir().join(format!("singlab-ds-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let stem = dir.join("data");
        d.save(&stem).unwrap();
        assert_eq!(Dataset::load(&stem).unwrap(), d);
        std::fs::remove_dir_all(dir).ok();
    }
}
