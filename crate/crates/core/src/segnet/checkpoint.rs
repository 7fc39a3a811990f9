//! Model checkpoints.
//!
//! A checkpoint is a JSON document:
//!
//! ```json
//! {
//!   "format": "agrobench-segnet",
//!   "version": 1,
//!   "layers": [
//!     { "out_channels": 8, "in_channels": 10, "kernel": 3,
//!       "weights": [ ... 720 values, [out][in][ky][kx] ... ],
//!       "bias": [ ... 8 values ... ] },
//!     ...
//!   ]
//! }
//! ```
//!
//! Floats are written in shortest round-trip form, so save/load is exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::layers::Conv2d;
use super::model::ARCHITECTURE;
use super::SegNetParams;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "agrobench-segnet";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub layers: Vec<Conv2d>,
}

impl Checkpoint {
    pub fn from_params(p: &SegNetParams) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.to_owned(),
            version: CHECKPOINT_VERSION,
            layers: p.layers.clone(),
        }
    }

    pub fn into_params(self) -> Result<SegNetParams> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format '{}'", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", self.version)));
        }
        if self.layers.len() != ARCHITECTURE.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} layers, found {}",
                ARCHITECTURE.len(),
                self.layers.len()
            )));
        }
        for (i, (l, &(out, inp, k))) in self.layers.iter().zip(&ARCHITECTURE).enumerate() {
            if (l.out_channels, l.in_channels, l.kernel) != (out, inp, k)
                || l.weights.len() != out * inp * k * k
                || l.bias.len() != out
            {
                return Err(Error::Checkpoint(format!(
                    "layer {i}: expected {out}x{inp}x{k}x{k}, found {}x{}x{}x{} with {} weights / {} biases",
                    l.out_channels,
                    l.in_channels,
                    l.kernel,
                    l.kernel,
                    l.weights.len(),
                    l.bias.len()
                )));
            }
        }
        let params = SegNetParams { layers: self.layers };
        if !params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameter".into()));
        }
        Ok(params)
    }
}

pub fn save_checkpoint(p: &SegNetParams, path: &Path) -> Result<()> {
    let json = serde_json::to_string(&Checkpoint::from_params(p))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<SegNetParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let ckpt: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    ckpt.into_params()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segnet::init_params;

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let p = init_params(42);
        save_checkpoint(&p, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), p);
    }

    #[test]
    fn wrong_shape_rejected() {
        let mut c = Checkpoint::from_params(&init_params(1));
        c.layers[2].bias.pop();
        assert!(matches!(c.into_params(), Err(Error::Checkpoint(_))));
        let mut c = Checkpoint::from_params(&init_params(1));
        c.version = 7;
        assert!(c.into_params().is_err());
    }

    #[test]
    fn garbage_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        fs::write(&path, "{\"format\": 1}").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
