//! Small encoder-decoder network for soil / crop / weed segmentation.
//!
//! Layout (3,667 parameters):
//!
//! ```text
//! 10 -> conv3x3 8  -> ReLU -> maxpool2
//!    -> conv3x3 16 -> ReLU -> maxpool2
//!    -> conv3x3 8  -> ReLU -> upsample2
//!    -> conv3x3 8  -> ReLU -> upsample2
//!    -> conv1x1 3  -> softmax
//! ```
//!
//! Forward and backward passes are written out by hand in `f64`.

mod checkpoint;
pub mod layers;
mod loss;
mod model;
mod synth;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use loss::{
    loss_cce, loss_registry, loss_wcce, CategoricalCrossEntropy, LossArgs, LossRegistry, SegLoss,
    WeightedCrossEntropy, PROB_FLOOR,
};
pub use model::{init_params, predict_mask, ForwardCache, Gradients, SegNetParams, PARAM_COUNT};
pub use synth::{generate_synthetic_scene, synthetic_dataset, SceneSpec};
pub use train::{train, Sample, TrainConfig, TrainOutcome};

pub const NUM_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Soil = 0,
    Crop = 1,
    Weed = 2,
}

impl Class {
    pub const ALL: [Class; NUM_CLASSES] = [Class::Soil, Class::Crop, Class::Weed];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Soil => "soil",
            Class::Crop => "crop",
            Class::Weed => "weed",
        }
    }
}

/// Per-pixel class indices (0 soil, 1 crop, 2 weed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {width}x{height}",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&c| c as usize >= NUM_CLASSES) {
            return Err(Error::invalid(format!("label {bad} outside 0..=2")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, class: Class) -> Self {
        Self {
            width,
            height,
            data: vec![class as u8; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for &c in &self.data {
            counts[c as usize] += 1;
        }
        counts
    }

    /// Pixel share of each class; all zeros for an empty mask.
    pub fn class_fractions(&self) -> [f64; NUM_CLASSES] {
        let n = self.data.len().max(1) as f64;
        self.class_counts().map(|c| c as f64 / n)
    }
}

/// Per-pixel class probabilities, class-major `3 x height x width`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != NUM_CLASSES * width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for 3x{height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Row-wise softmax of class-major logits.
    pub fn from_logits(width: usize, height: usize, logits: &[f64]) -> Result<Self> {
        let n = width * height;
        if logits.len() != NUM_CLASSES * n {
            return Err(Error::ShapeMismatch(format!(
                "{} logits for 3x{height}x{width}",
                logits.len()
            )));
        }
        let mut data = vec![0.0; logits.len()];
        for i in 0..n {
            let z = [logits[i], logits[n + i], logits[2 * n + i]];
            let m = z[0].max(z[1]).max(z[2]);
            let e = z.map(|v| (v - m).exp());
            let s = e[0] + e[1] + e[2];
            for c in 0..NUM_CLASSES {
                data[c * n + i] = e[c] / s;
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn prob(&self, class: usize, pixel: usize) -> f64 {
        self.data[class * self.pixel_count() + pixel]
    }

    /// Argmax per pixel; ties resolve to the lowest class index.
    pub fn argmax(&self) -> LabelMask {
        let n = self.pixel_count();
        let data = (0..n)
            .map(|i| {
                let mut best = 0;
                for c in 1..NUM_CLASSES {
                    if self.data[c * n + i] > self.data[best * n + i] {
                        best = c;
                    }
                }
                best as u8
            })
            .collect();
        LabelMask {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights(pub [f64; NUM_CLASSES]);

impl ClassWeights {
    pub fn uniform() -> Self {
        Self([1.0; NUM_CLASSES])
    }

    pub fn new(w: [f64; NUM_CLASSES]) -> Result<Self> {
        if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::invalid(format!("class weights must be > 0, got {w:?}")));
        }
        Ok(Self(w))
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }
}

/// Balanced inverse-frequency weights `N / (3 n_c)`.
pub fn class_weights_from_frequency(masks: &[LabelMask]) -> Result<ClassWeights> {
    let mut counts = [0usize; NUM_CLASSES];
    for m in masks {
        for (acc, c) in counts.iter_mut().zip(m.class_counts()) {
            *acc += c;
        }
    }
    let total: usize = counts.iter().sum();
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::ZeroFrequency(c));
    }
    Ok(ClassWeights(
        counts.map(|n| total as f64 / (NUM_CLASSES as f64 * n as f64)),
    ))
}
