use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{init_params, LabelMask, SegLoss, SegNetParams};
use crate::error::{Error, Result};
use crate::vision::{build_channel_stack, ChannelStack, RgbImage};

#[derive(Debug, Clone)]
pub struct Sample {
    pub input: ChannelStack,
    pub target: LabelMask,
}

impl Sample {
    pub fn from_image(image: &RgbImage, target: LabelMask) -> Result<Self> {
        if (image.width(), image.height()) != (target.width(), target.height()) {
            return Err(Error::ShapeMismatch("image and mask sizes differ".into()));
        }
        Ok(Self {
            input: build_channel_stack(image),
            target,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            learning_rate: 0.05,
            batch_size: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: SegNetParams,
    /// Mean training loss per epoch, measured before each update.
    pub history: Vec<f64>,
}

/// Mini-batch gradient descent from `init_params(seed)`. Shuffling draws
/// from a separate stream of the same seed, so runs are reproducible.
pub fn train(dataset: &[Sample], cfg: &TrainConfig, loss: &dyn SegLoss) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::invalid("batch_size must be >= 1"));
    }
    if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be > 0"));
    }
    let mut params = init_params(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grads = SegNetParams::zeros();
            for &i in batch {
                let s = &dataset[i];
                let (l, g) = params.loss_and_gradient(&s.input, &s.target, loss)?;
                epoch_loss += l;
                grads.add_scaled(&g, 1.0 / batch.len() as f64);
            }
            params.sgd_step(&grads, cfg.learning_rate)?;
        }
        if !params.is_finite() {
            return Err(Error::invalid("training diverged (non-finite parameters)"));
        }
        history.push(epoch_loss / dataset.len() as f64);
    }
    Ok(TrainOutcome { params, history })
}
