//! Flat `key = value` run configuration.
//!
//! Values are resolved in three layers: built-in defaults, then the config
//! file (`--config FILE`), then command-line flags. The resolved map is
//! written back out as the run manifest, which is itself a valid config
//! file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use singlab::Activation;

use crate::CliError;

/// `(key, default, help)`; an empty default means "derived" (see help).
pub const KEYS: &[(&str, &str, &str)] = &[
    ("builder", "", "construction: teeth, sawtooth, square, mult, multi-mult, monomial, step, smooth, indicator, piecewise-smooth"),
    ("target", "graph-indicator", "target: graph-indicator, graph-indicator-rough, rectangle, quadrant, disk, random, or holder (smooth builder)"),
    ("estimator", "dnn", "estimator(s), comma separated: dnn, kernel-ridge, wavelet, curvelet"),
    ("activation", "relu", "activation: relu, leaky:<slope>, affine:<c1>:<c2>, sigmoid, softplus, swish"),
    ("alpha", "", "boundary smoothness α (default: the target's)"),
    ("beta", "", "piece smoothness β (default: the target's)"),
    ("D", "2", "input dimension"),
    ("M", "2", "number of pieces (random target)"),
    ("J", "1", "number of boundaries (random target)"),
    ("radius", "1", "Hölder radius F (random and holder targets)"),
    ("piece", "0", "piece index (indicator builder)"),
    ("sigma", "0.1", "noise level σ"),
    ("n", "1024", "sample size (regress)"),
    ("n-grid", "256,512,1024,2048", "sample sizes (rate-sweep), strictly increasing"),
    ("reps", "10", "replicates per sample size"),
    ("m", "4", "saw-tooth depth of square/mult/multi-mult"),
    ("T", "1", "input range [-T, T] of mult/multi-mult/monomial/step"),
    ("Dp", "2", "number of factors of multi-mult"),
    ("t", "3", "composition depth of sawtooth"),
    ("gamma", "2", "monomial degree"),
    ("eps", "0.1", "accuracy of monomial/step/indicator, δ of smooth"),
    ("eps1", "0.1", "smooth-part accuracy of piecewise-smooth"),
    ("eps2", "0.1", "indicator-part accuracy of piecewise-smooth"),
    ("eps-grid", "0.2,0.1,0.05,0.025", "strictly decreasing accuracies (approx-sweep)"),
    ("tol", "", "tolerance checked by --strict (default: the construction's bound)"),
    ("tau", "3", "series truncation τ"),
    ("tau-grid", "", "if set, τ is tuned per n over this list (wavelet)"),
    ("bandwidth", "0.1", "Gaussian kernel bandwidth"),
    ("lambda", "1e-3", "ridge λ"),
    ("bandwidths", "", "if set with lambdas, kernel ridge is oracle-tuned per replicate over the grid"),
    ("lambdas", "", "ridge grid for oracle tuning"),
    ("hidden", "32,32,32", "DNN hidden widths"),
    ("dnn-scale", "", "if set, DNN widths follow the budget dnn-scale·n^s (s from α, β, D)"),
    ("dnn-layers", "3", "hidden layers under dnn-scale"),
    ("lr", "0.05", "DNN learning rate"),
    ("momentum", "0.9", "DNN heavy-ball momentum"),
    ("iters", "3000", "DNN iteration budget"),
    ("restarts", "5", "DNN random restarts"),
    ("pilot-iters", "200", "DNN pilot iterations per restart"),
    ("clip", "2", "DNN output clip F (0 disables)"),
    ("curvelet-grid", "256", "curvelet frequency grid size N"),
    ("delta1", "1", "curvelet location spacing (fraction of critical), axis 1"),
    ("delta2", "1", "curvelet location spacing (fraction of critical), axis 2"),
    ("points", "", "QMC points (default 2^16, 2^17 for discontinuous targets)"),
    ("window", "0.3", "slope tolerance used by report"),
    ("seed", "", "master seed (default: $SINGLAB_SEED, else 0)"),
    ("out", "singlab-out", "output directory"),
    ("workers", "0", "worker threads (0: all cores)"),
    ("save-network", "false", "also write the constructed network (construct)"),
    ("svg", "true", "write SVG plots"),
];

pub fn is_key(k: &str) -> bool {
    KEYS.iter().any(|(name, _, _)| *name == k)
}

/// Parses a config file: `key = value` per line, `#` starts a comment.
pub fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_text(&text, &path.display().to_string())
}

pub fn parse_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("{origin}:{}: expected 'key = value'", no + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !is_key(k) {
            return Err(CliError::Usage(format!("{origin}:{}: unknown key '{k}'", no + 1)));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
    pub strict: bool,
}

impl RunConfig {
    pub fn resolve(command: &str, file: Option<&Path>, flags: BTreeMap<String, String>, strict: bool) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = KEYS.iter().map(|(k, d, _)| (k.to_string(), d.to_string())).collect();
        if values["seed"].is_empty() {
            if let Ok(s) = std::env::var("SINGLAB_SEED") {
                values.insert("seed".into(), s);
            }
        }
        if let Some(path) = file {
            values.extend(parse_file(path)?);
        }
        values.extend(flags);
        if values["seed"].is_empty() {
            values.insert("seed".into(), "0".into());
        }
        Ok(RunConfig { command: command.to_string(), values, strict })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e| CliError::Usage(format!("invalid value '{v}' for key '{key}': {e}")))
    }

    pub fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| CliError::Usage(format!("invalid list entry '{s}' for key '{key}': {e}"))))
            .collect()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" | "" => Ok(false),
            v => Err(CliError::Usage(format!("invalid boolean '{v}' for key '{key}'"))),
        }
    }

    pub fn activation(&self) -> Result<Activation, CliError> {
        Activation::parse(self.raw("activation")).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed")
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.raw("out"))
    }

    /// The manifest: a config file reproducing this run.
    pub fn manifest(&self) -> String {
        let mut s = format!("# singlab {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        s.push_str(&format!("# rerun: singlab {} --config manifest.txt{}\n", self.command, if self.strict { " --strict" } else { "" }));
        for (k, v) in &self.values {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}
