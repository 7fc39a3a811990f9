use super::{ClassWeights, LabelMask, ProbMap, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::registry::Registry;

/// Probabilities are clamped to this floor before the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// A per-pixel classification loss over softmax outputs.
///
/// Both built-in losses are class-weighted cross-entropies
/// `-(1/N) sum_i w[t_i] ln p_i[t_i]`; they differ only in the weights.
pub trait SegLoss: Send + Sync {
    fn name(&self) -> &'static str;

    fn class_weights(&self) -> ClassWeights;

    fn loss(&self, probs: &ProbMap, target: &LabelMask) -> Result<f64> {
        weighted_cross_entropy(probs, target, &self.class_weights())
    }

    /// Gradient of [`SegLoss::loss`] with respect to the class-major logits.
    fn logit_gradient(&self, probs: &ProbMap, target: &LabelMask) -> Result<Vec<f64>> {
        weighted_cross_entropy_grad(probs, target, &self.class_weights())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CategoricalCrossEntropy;

impl SegLoss for CategoricalCrossEntropy {
    fn name(&self) -> &'static str {
        "cce"
    }

    fn class_weights(&self) -> ClassWeights {
        ClassWeights::uniform()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WeightedCrossEntropy {
    weights: ClassWeights,
}

impl WeightedCrossEntropy {
    pub fn new(weights: ClassWeights) -> Self {
        Self { weights }
    }
}

impl SegLoss for WeightedCrossEntropy {
    fn name(&self) -> &'static str {
        "wcce"
    }

    fn class_weights(&self) -> ClassWeights {
        self.weights
    }
}

/// What a loss constructor may need.
#[derive(Debug, Clone, Copy, Default)]
pub struct LossArgs {
    pub class_weights: Option<ClassWeights>,
}

pub type LossRegistry = Registry<dyn SegLoss, LossArgs>;

/// `cce` and `wcce`; the latter requires class weights.
pub fn loss_registry() -> LossRegistry {
    let mut reg = LossRegistry::new("loss");
    reg.register("cce", |_| Ok(Box::new(CategoricalCrossEntropy)));
    reg.register("wcce", |a: &LossArgs| {
        let w = a
            .class_weights
            .ok_or_else(|| Error::invalid("wcce needs class weights"))?;
        Ok(Box::new(WeightedCrossEntropy::new(w)))
    });
    reg
}

fn check_shapes(probs: &ProbMap, target: &LabelMask) -> Result<()> {
    if (probs.width(), probs.height()) != (target.width(), target.height()) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{} vs target {}x{}",
            probs.width(),
            probs.height(),
            target.width(),
            target.height()
        )));
    }
    if target.is_empty() {
        return Err(Error::Empty("target mask"));
    }
    Ok(())
}

fn weighted_cross_entropy(probs: &ProbMap, target: &LabelMask, w: &ClassWeights) -> Result<f64> {
    check_shapes(probs, target)?;
    let n = target.len();
    let sum: f64 = target
        .data()
        .iter()
        .enumerate()
        .map(|(i, &t)| w.get(t as usize) * probs.prob(t as usize, i).max(PROB_FLOOR).ln())
        .sum();
    Ok(-sum / n as f64)
}

fn weighted_cross_entropy_grad(
    probs: &ProbMap,
    target: &LabelMask,
    w: &ClassWeights,
) -> Result<Vec<f64>> {
    check_shapes(probs, target)?;
    let n = target.len();
    let mut grad = vec![0.0; NUM_CLASSES * n];
    for (i, &t) in target.data().iter().enumerate() {
        let t = t as usize;
        // Below the floor the clamped loss is locally constant.
        if probs.prob(t, i) < PROB_FLOOR {
            continue;
        }
        let scale = w.get(t) / n as f64;
        for c in 0..NUM_CLASSES {
            let onehot = if c == t { 1.0 } else { 0.0 };
            grad[c * n + i] = scale * (probs.prob(c, i) - onehot);
        }
    }
    Ok(grad)
}

pub fn loss_cce(probs: &ProbMap, target: &LabelMask) -> Result<f64> {
    CategoricalCrossEntropy.loss(probs, target)
}

pub fn loss_wcce(probs: &ProbMap, target: &LabelMask, weights: &ClassWeights) -> Result<f64> {
    WeightedCrossEntropy::new(*weights).loss(probs, target)
}
