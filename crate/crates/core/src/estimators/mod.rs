//! The competing regression estimators: DNN least squares, kernel ridge,
//! the Haar tensor series and the curvelet series on `[-1,1]²`.

mod curvelet;
mod dnn;
mod kernel;
mod wavelet;

pub use curvelet::{angular_window, blend, fit_curvelet, radial_window, wedges_at, window, CurveletConfig, CurveletSeries, Wedge};
pub use dnn::{dense_params, fit_dnn, DnnConfig, DnnFit};
pub use kernel::{fit_kernel_ridge, GaussianKernel, GramCache, KernelRidge};
pub use wavelet::{fit_wavelet, haar_index, HaarSeries};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcgen::{Dataset, Domain};
use crate::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Dnn,
    KernelRidge,
    Wavelet,
    Curvelet,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [EstimatorKind::Dnn, EstimatorKind::KernelRidge, EstimatorKind::Wavelet, EstimatorKind::Curvelet];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Dnn => "dnn",
            EstimatorKind::KernelRidge => "kernel-ridge",
            EstimatorKind::Wavelet => "wavelet",
            EstimatorKind::Curvelet => "curvelet",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Parse(format!("unknown estimator '{s}'")))
    }

    /// Whether predictions are linear in the training responses.
    pub fn is_linear(&self) -> bool {
        !matches!(self, EstimatorKind::Dnn)
    }
}

/// Kernel ridge settings (Gaussian kernel).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub bandwidth: f64,
    pub lambda: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { bandwidth: 0.1, lambda: 1e-3 }
    }
}

/// Settings for every estimator; only the part matching the fitted kind is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub dnn: DnnConfig,
    pub kernel: KernelConfig,
    pub wavelet_tau: u32,
    pub curvelet: CurveletConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { dnn: DnnConfig::default(), kernel: KernelConfig::default(), wavelet_tau: 3, curvelet: CurveletConfig::default() }
    }
}

impl FitConfig {
    pub fn validate(&self, kind: EstimatorKind) -> Result<()> {
        match kind {
            EstimatorKind::Dnn => self.dnn.validate(),
            EstimatorKind::KernelRidge => {
                if !(self.kernel.bandwidth > 0.0) || !(self.kernel.lambda > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "kernel bandwidth and ridge λ must be positive, got {} and {}",
                        self.kernel.bandwidth, self.kernel.lambda
                    )));
                }
                Ok(())
            }
            EstimatorKind::Wavelet => Ok(()),
            EstimatorKind::Curvelet => self.curvelet.validate(),
        }
    }
}

/// Fitted state of a predictor.
#[derive(Debug, Clone, PartialEq)]
pub enum Fitted {
    Dnn(Network),
    KernelRidge(KernelRidge),
    Wavelet(HaarSeries),
    Curvelet(CurveletSeries),
}

/// What the fit recorded about itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub n: usize,
    pub seed: u64,
    /// Final mean squared training residual.
    pub loss: f64,
    pub iterations: Option<usize>,
    /// Optimization gap estimate (loss decrease over the last 5% of iterations).
    pub gap: Option<f64>,
    pub restart: Option<usize>,
    pub tau: Option<u32>,
    pub lambda: Option<f64>,
    pub bandwidth: Option<f64>,
    /// `(L, S, B)` of the fitted network.
    pub network_size: Option<(usize, usize, f64)>,
    pub coefficients: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub fitted: Fitted,
    pub meta: FitMeta,
    pub dim: usize,
    pub domain: Domain,
}

fn training_loss(p: &Predictor, data: &Dataset) -> Result<f64> {
    let pred = p.predict_batch(&data.x)?;
    Ok(pred.iter().zip(&data.y).map(|(a, y)| (a - y) * (a - y)).sum::<f64>() / data.len() as f64)
}

/// Fits the estimator of the given kind; `seed` only affects the DNN.
pub fn fit(kind: EstimatorKind, data: &Dataset, cfg: &FitConfig, seed: u64) -> Result<Predictor> {
    cfg.validate(kind)?;
    let meta = FitMeta {
        n: data.len(),
        seed,
        loss: f64::NAN,
        iterations: None,
        gap: None,
        restart: None,
        tau: None,
        lambda: None,
        bandwidth: None,
        network_size: None,
        coefficients: None,
    };
    let mut p = match kind {
        EstimatorKind::Dnn => {
            let f = fit_dnn(data, &cfg.dnn, seed)?;
            let m = f.network.metrics();
            let meta = FitMeta {
                loss: f.loss,
                iterations: Some(f.iterations),
                gap: Some(f.gap),
                restart: Some(f.restart),
                network_size: Some((m.depth, m.sparsity, m.magnitude)),
                ..meta
            };
            return Ok(Predictor { fitted: Fitted::Dnn(f.network), meta, dim: data.dim, domain: data.domain });
        }
        EstimatorKind::KernelRidge => {
            let k = fit_kernel_ridge(data, cfg.kernel.bandwidth, cfg.kernel.lambda)?;
            let meta = FitMeta { lambda: Some(cfg.kernel.lambda), bandwidth: Some(cfg.kernel.bandwidth), ..meta };
            Predictor { fitted: Fitted::KernelRidge(k), meta, dim: data.dim, domain: data.domain }
        }
        EstimatorKind::Wavelet => {
            let w = fit_wavelet(data, cfg.wavelet_tau)?;
            let meta = FitMeta { tau: Some(cfg.wavelet_tau), coefficients: Some(w.coef.len()), ..meta };
            Predictor { fitted: Fitted::Wavelet(w), meta, dim: data.dim, domain: data.domain }
        }
        EstimatorKind::Curvelet => {
            let c = fit_curvelet(data, cfg.curvelet)?;
            let meta = FitMeta { tau: Some(cfg.curvelet.tau), coefficients: Some(c.num_coefficients()), ..meta };
            Predictor { fitted: Fitted::Curvelet(c), meta, dim: data.dim, domain: data.domain }
        }
    };
    p.meta.loss = training_loss(&p, data)?;
    Ok(p)
}

/// Kernel ridge refit for a new ridge on a cached Gram matrix, wrapped as a predictor.
pub fn kernel_predictor(cache: &GramCache, data: &Dataset, lambda: f64) -> Result<Predictor> {
    let k = cache.fit(data, lambda)?;
    let meta = FitMeta {
        n: data.len(),
        seed: 0,
        loss: f64::NAN,
        iterations: None,
        gap: None,
        restart: None,
        tau: None,
        lambda: Some(lambda),
        bandwidth: Some(k.kernel.bandwidth),
        network_size: None,
        coefficients: None,
    };
    let mut p = Predictor { fitted: Fitted::KernelRidge(k), meta, dim: data.dim, domain: data.domain };
    p.meta.loss = training_loss(&p, data)?;
    Ok(p)
}

#[derive(Serialize, Deserialize)]
struct Descriptor {
    format: String,
    kind: EstimatorKind,
    dim: usize,
    domain: Domain,
    meta: FitMeta,
    kernel: Option<GaussianKernel>,
    curvelet: Option<CurveletConfig>,
    /// Per-wedge `(scale, angle, M₁, M₂)`.
    wedges: Option<Vec<(i32, usize, usize, usize)>>,
}

const FORMAT: &str = "singlab-predictor-v1";

fn read_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), line_no + 1)))?);
    }
    Ok(rows)
}

impl Predictor {
    pub fn kind(&self) -> EstimatorKind {
        match self.fitted {
            Fitted::Dnn(_) => EstimatorKind::Dnn,
            Fitted::KernelRidge(_) => EstimatorKind::KernelRidge,
            Fitted::Wavelet(_) => EstimatorKind::Wavelet,
            Fitted::Curvelet(_) => EstimatorKind::Curvelet,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::InputShape { expected: self.dim, got: x.len() });
        }
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!("{} predictor on {} queried at {x:?}", self.kind().name(), self.domain.name())));
        }
        match &self.fitted {
            Fitted::Dnn(net) => net.eval1(x),
            Fitted::KernelRidge(k) => Ok(k.predict(x)),
            Fitted::Wavelet(w) => w.predict(x),
            Fitted::Curvelet(c) => c.predict(x),
        }
    }

    /// Predictions at row-major `points`; identical to repeated [`Predictor::predict`].
    pub fn predict_batch(&self, points: &[f64]) -> Result<Vec<f64>> {
        if let Fitted::Dnn(net) = &self.fitted {
            // one scratch buffer for the whole batch
            if points.len() % self.dim != 0 {
                return Err(Error::InputShape { expected: self.dim, got: points.len() % self.dim });
            }
            if let Some(x) = points.chunks(self.dim).find(|x| !self.domain.contains(x)) {
                return Err(Error::Domain(format!("dnn predictor on {} queried at {x:?}", self.domain.name())));
            }
            return net.eval_points(points, self.dim);
        }
        points.chunks(self.dim).map(|p| self.predict(p)).collect()
    }

    /// Writes `predictor.json` plus the kind's state files into `dir`:
    /// `network.json` (dnn), `design.csv` + `weights.csv` (kernel ridge), or
    /// `coefficients.csv` (series).
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut desc = Descriptor {
            format: FORMAT.into(),
            kind: self.kind(),
            dim: self.dim,
            domain: self.domain,
            meta: self.meta.clone(),
            kernel: None,
            curvelet: None,
            wedges: None,
        };
        match &self.fitted {
            Fitted::Dnn(net) => net.save(&dir.join("network.json"))?,
            Fitted::KernelRidge(k) => {
                desc.kernel = Some(k.kernel);
                let mut s = (1..=self.dim).map(|d| format!("x_{d}")).collect::<Vec<_>>().join(",");
                s.push('\n');
                for row in k.design.chunks(self.dim) {
                    s.push_str(&row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                std::fs::write(dir.join("design.csv"), s)?;
                let mut s = String::from("a\n");
                for a in &k.weights {
                    writeln!(s, "{a}").unwrap();
                }
                std::fs::write(dir.join("weights.csv"), s)?;
            }
            Fitted::Wavelet(w) => {
                let mut s = (1..=self.dim).flat_map(|d| [format!("j_{d}"), format!("k_{d}")]).collect::<Vec<_>>().join(",");
                s.push_str(",value\n");
                let n = w.per_axis();
                for (flat, c) in w.coef.iter().enumerate() {
                    let mut rest = flat;
                    let mut idx = vec![0; self.dim];
                    for d in (0..self.dim).rev() {
                        idx[d] = rest % n;
                        rest /= n;
                    }
                    for i in idx {
                        let (j, k) = haar_index(i);
                        write!(s, "{j},{k},").unwrap();
                    }
                    writeln!(s, "{c}").unwrap();
                }
                std::fs::write(dir.join("coefficients.csv"), s)?;
            }
            Fitted::Curvelet(c) => {
                desc.curvelet = Some(c.config);
                desc.wedges = Some(c.wedges.iter().map(|w| (w.scale, w.angle, w.lattice[0], w.lattice[1])).collect());
                let mut s = String::from("j,l,k_1,k_2,value\n");
                for w in &c.wedges {
                    for (flat, v) in w.coef.iter().enumerate() {
                        writeln!(s, "{},{},{},{},{v}", w.scale, w.angle, flat / w.lattice[1], flat % w.lattice[1]).unwrap();
                    }
                }
                std::fs::write(dir.join("coefficients.csv"), s)?;
            }
        }
        std::fs::write(dir.join("predictor.json"), serde_json::to_string_pretty(&desc)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Predictor> {
        let desc: Descriptor = serde_json::from_str(&std::fs::read_to_string(dir.join("predictor.json"))?)?;
        if desc.format != FORMAT {
            return Err(Error::Parse(format!("unknown predictor format '{}'", desc.format)));
        }
        let missing = |what: &str| Error::Parse(format!("predictor descriptor lacks {what}"));
        let fitted = match desc.kind {
            EstimatorKind::Dnn => Fitted::Dnn(Network::load(&dir.join("network.json"))?),
            EstimatorKind::KernelRidge => {
                let kernel = desc.kernel.ok_or_else(|| missing("kernel"))?;
                let design: Vec<f64> = read_csv(&dir.join("design.csv"))?.concat();
                let weights: Vec<f64> = read_csv(&dir.join("weights.csv"))?.concat();
                if design.len() != weights.len() * desc.dim {
                    return Err(Error::Parse("kernel design and weights disagree in size".into()));
                }
                Fitted::KernelRidge(KernelRidge { kernel, lambda: desc.meta.lambda.unwrap_or(f64::NAN), dim: desc.dim, design, weights })
            }
            EstimatorKind::Wavelet => {
                let tau = desc.meta.tau.ok_or_else(|| missing("tau"))?;
                let coef = read_csv(&dir.join("coefficients.csv"))?.into_iter().map(|r| *r.last().unwrap()).collect();
                Fitted::Wavelet(HaarSeries::from_coefficients(desc.dim, tau, coef)?)
            }
            EstimatorKind::Curvelet => {
                let cfg = desc.curvelet.ok_or_else(|| missing("curvelet config"))?;
                let shapes = desc.wedges.ok_or_else(|| missing("wedge shapes"))?;
                let rows = read_csv(&dir.join("coefficients.csv"))?;
                let mut coef = Vec::with_capacity(shapes.len());
                let mut at = 0;
                for &(_, _, m1, m2) in &shapes {
                    let end = at + m1 * m2;
                    if end > rows.len() {
                        return Err(Error::Parse("curvelet coefficient table is truncated".into()));
                    }
                    coef.push(rows[at..end].iter().map(|r| *r.last().unwrap()).collect());
                    at = end;
                }
                Fitted::Curvelet(CurveletSeries::from_coefficients(cfg, coef)?)
            }
        };
        Ok(Predictor { fitted, meta: desc.meta, dim: desc.dim, domain: desc.domain })
    }
}
