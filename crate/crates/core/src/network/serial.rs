//! Versioned JSON text format for networks.
//!
//! Small layers are written as row-major dense `weights`; layers with more
//! than `DENSE_LIMIT` cells are written as row-major `[row, col, value]`
//! `entries` instead. Both forms are accepted on read. Doubles are printed
//! in shortest round-trip form, so finite values survive bit-exactly.

use serde::{Deserialize, Serialize};

use super::{Activation, Layer, Network};
use crate::error::{Error, Result};

pub const NETWORK_FORMAT: &str = "singlab-network";
pub const NETWORK_FORMAT_VERSION: u32 = 1;
const DENSE_LIMIT: usize = 1 << 20;

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    format: String,
    version: u32,
    activation: Activation,
    clip: Option<f64>,
    layers: Vec<LayerFile>,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    rows: usize,
    cols: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<(usize, usize, f64)>>,
    bias: Vec<f64>,
}

impl Network {
    pub fn to_json(&self) -> Result<String> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let dense = l.rows * l.cols <= DENSE_LIMIT;
                LayerFile {
                    rows: l.rows,
                    cols: l.cols,
                    weights: dense.then(|| l.to_dense()),
                    entries: (!dense).then(|| l.triplets()),
                    bias: l.bias.clone(),
                }
            })
            .collect();
        let file = NetworkFile {
            format: NETWORK_FORMAT.into(),
            version: NETWORK_FORMAT_VERSION,
            activation: self.act,
            clip: self.clip,
            layers,
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)?;
        if file.format != NETWORK_FORMAT {
            return Err(Error::Parse(format!("not a network file (format '{}')", file.format)));
        }
        if file.version != NETWORK_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported network format version {}", file.version)));
        }
        let layers = file
            .layers
            .into_iter()
            .map(|l| match (l.weights, l.entries) {
                (Some(w), None) => Layer::from_dense(l.rows, l.cols, &w, l.bias),
                (None, Some(e)) => Layer::from_triplets(l.rows, l.cols, e, l.bias),
                _ => Err(Error::Parse("layer must carry exactly one of 'weights' or 'entries'".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Network::new(layers, file.activation)?.with_clip(file.clip))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Network::from_json(&std::fs::read_to_string(path)?)
    }
}
