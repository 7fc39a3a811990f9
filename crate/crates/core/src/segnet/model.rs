use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{
    maxpool2, maxpool2_backward, relu_backward_in_place, relu_in_place, upsample2,
    upsample2_backward, Conv2d, Tensor,
};
use super::{LabelMask, ProbMap, SegLoss, NUM_CLASSES};
use crate::error::{Error, Result};
use crate::vision::{ChannelStack, CHANNEL_COUNT};

/// `(out, in, kernel)` of the five convolutions.
pub(crate) const ARCHITECTURE: [(usize, usize, usize); 5] = [
    (8, CHANNEL_COUNT, 3),
    (16, 8, 3),
    (8, 16, 3),
    (8, 8, 3),
    (NUM_CLASSES, 8, 1),
];

pub const PARAM_COUNT: usize = 3_667;

#[derive(Debug, Clone, PartialEq)]
pub struct SegNetParams {
    pub(crate) layers: Vec<Conv2d>,
}

/// Gradients share the parameter layout.
pub type Gradients = SegNetParams;

/// Glorot-uniform weights, zero biases.
pub fn init_params(seed: u64) -> SegNetParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = ARCHITECTURE
        .iter()
        .map(|&(out, inp, k)| {
            let mut layer = Conv2d::zeros(out, inp, k);
            let limit = (6.0 / ((inp * k * k + out * k * k) as f64)).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
            layer
        })
        .collect();
    SegNetParams { layers }
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Tensor,
    a1: Tensor,
    arg1: Vec<usize>,
    p1: Tensor,
    a2: Tensor,
    arg2: Vec<usize>,
    p2: Tensor,
    a3: Tensor,
    u3: Tensor,
    a4: Tensor,
    u4: Tensor,
    pub probs: ProbMap,
}

impl SegNetParams {
    pub fn zeros() -> Self {
        Self {
            layers: ARCHITECTURE
                .iter()
                .map(|&(o, i, k)| Conv2d::zeros(o, i, k))
                .collect(),
        }
    }

    pub fn layers(&self) -> &[Conv2d] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Conv2d::param_count).sum()
    }

    /// Visits every scalar in a fixed order: per layer, weights then biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.values().copied().collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} parameters",
                flat.len(),
                self.param_count()
            )));
        }
        for (p, &v) in self.values_mut().zip(flat) {
            *p = v;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, other: &SegNetParams, alpha: f64) {
        for (p, &g) in self.values_mut().zip(other.values()) {
            *p += alpha * g;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for p in self.values_mut() {
            *p *= alpha;
        }
    }

    /// Plain gradient descent step `p - lr * grads`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) -> Result<()> {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate must be >= 0, got {lr}")));
        }
        self.add_scaled(grads, -lr);
        Ok(())
    }

    fn check_input(x: &ChannelStack) -> Result<()> {
        if x.height() % 4 != 0 || x.width() % 4 != 0 || x.height() == 0 || x.width() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "height and width must be non-zero multiples of 4 (two 2x2 poolings), got {}x{}",
                x.width(),
                x.height()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &ChannelStack) -> Result<ProbMap> {
        Ok(self.forward_cached(x)?.probs)
    }

    pub fn forward_cached(&self, x: &ChannelStack) -> Result<ForwardCache> {
        Self::check_input(x)?;
        let input = Tensor {
            channels: CHANNEL_COUNT,
            height: x.height(),
            width: x.width(),
            data: x.as_slice().to_vec(),
        };
        let l = &self.layers;
        let mut a1 = l[0].forward(&input);
        relu_in_place(&mut a1);
        let (p1, arg1) = maxpool2(&a1);
        let mut a2 = l[1].forward(&p1);
        relu_in_place(&mut a2);
        let (p2, arg2) = maxpool2(&a2);
        let mut a3 = l[2].forward(&p2);
        relu_in_place(&mut a3);
        let u3 = upsample2(&a3);
        let mut a4 = l[3].forward(&u3);
        relu_in_place(&mut a4);
        let u4 = upsample2(&a4);
        let logits = l[4].forward(&u4);
        let probs = ProbMap::from_logits(x.width(), x.height(), &logits.data)?;
        Ok(ForwardCache {
            input,
            a1,
            arg1,
            p1,
            a2,
            arg2,
            p2,
            a3,
            u3,
            a4,
            u4,
            probs,
        })
    }

    /// Gradient of the loss with respect to every parameter, given the loss
    /// gradient with respect to the logits.
    pub fn backward(&self, cache: &ForwardCache, d_logits: Vec<f64>) -> Gradients {
        let l = &self.layers;
        let mut g = SegNetParams::zeros();
        let (h, w) = (cache.input.height, cache.input.width);
        let d_logits = Tensor {
            channels: NUM_CLASSES,
            height: h,
            width: w,
            data: d_logits,
        };

        let d_u4 = l[4]
            .backward(&cache.u4, &d_logits, &mut g.layers[4], true)
            .expect("input grad requested");
        let mut d_a4 = upsample2_backward(&d_u4);
        relu_backward_in_place(&cache.a4, &mut d_a4);

        let d_u3 = l[3]
            .backward(&cache.u3, &d_a4, &mut g.layers[3], true)
            .expect("input grad requested");
        let mut d_a3 = upsample2_backward(&d_u3);
        relu_backward_in_place(&cache.a3, &mut d_a3);

        let d_p2 = l[2]
            .backward(&cache.p2, &d_a3, &mut g.layers[2], true)
            .expect("input grad requested");
        let a2 = &cache.a2;
        let mut d_a2 = maxpool2_backward((a2.channels, a2.height, a2.width), &cache.arg2, &d_p2);
        relu_backward_in_place(a2, &mut d_a2);

        let d_p1 = l[1]
            .backward(&cache.p1, &d_a2, &mut g.layers[1], true)
            .expect("input grad requested");
        let a1 = &cache.a1;
        let mut d_a1 = maxpool2_backward((a1.channels, a1.height, a1.width), &cache.arg1, &d_p1);
        relu_backward_in_place(a1, &mut d_a1);

        l[0].backward(&cache.input, &d_a1, &mut g.layers[0], false);
        g
    }

    /// Loss value and its exact gradient for one labelled input.
    pub fn loss_and_gradient(
        &self,
        x: &ChannelStack,
        target: &LabelMask,
        loss: &dyn SegLoss,
    ) -> Result<(f64, Gradients)> {
        let cache = self.forward_cached(x)?;
        let value = loss.loss(&cache.probs, target)?;
        let d_logits = loss.logit_gradient(&cache.probs, target)?;
        Ok((value, self.backward(&cache, d_logits)))
    }

    pub fn loss(&self, x: &ChannelStack, target: &LabelMask, loss: &dyn SegLoss) -> Result<f64> {
        loss.loss(&self.forward(x)?, target)
    }
}

pub fn predict_mask(params: &SegNetParams, x: &ChannelStack) -> Result<LabelMask> {
    Ok(params.forward(x)?.argmax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segnet::{CategoricalCrossEntropy, ClassWeights, WeightedCrossEntropy};
    use crate::vision::ChannelStack;

    fn random_input(seed: u64, w: usize, h: usize) -> ChannelStack {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..CHANNEL_COUNT * w * h).map(|_| rng.random::<f64>()).collect();
        ChannelStack::from_planes(w, h, data).unwrap()
    }

    fn random_mask(seed: u64, w: usize, h: usize) -> LabelMask {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LabelMask::new(w, h, (0..w * h).map(|_| rng.random_range(0..3u8)).collect()).unwrap()
    }

    #[test]
    fn parameter_count() {
        let p = init_params(1);
        let per_layer: Vec<usize> = p.layers().iter().map(|l| l.param_count()).collect();
        assert_eq!(per_layer, vec![728, 1168, 1160, 584, 27]);
        assert_eq!(p.param_count(), PARAM_COUNT);
        assert!(PARAM_COUNT < 30_000);
    }

    #[test]
    fn init_is_deterministic_with_zero_bias() {
        assert_eq!(init_params(9), init_params(9));
        assert_ne!(init_params(9), init_params(10));
        let p = init_params(9);
        assert!(p.layers().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        for l in p.layers() {
            let lim = (6.0 / ((l.in_channels + l.out_channels) * l.kernel * l.kernel) as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= lim));
        }
    }

    #[test]
    fn forward_shapes_and_normalization() {
        let p = init_params(3);
        let probs = p.forward(&random_input(1, 64, 48)).unwrap();
        assert_eq!((probs.width(), probs.height()), (64, 48));
        for i in 0..probs.pixel_count() {
            let s: f64 = (0..3).map(|c| probs.prob(c, i)).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_network_is_uniform() {
        let probs = SegNetParams::zeros().forward(&random_input(2, 8, 8)).unwrap();
        assert!(probs.data().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert!(predict_mask(&SegNetParams::zeros(), &random_input(2, 8, 8))
            .unwrap()
            .data()
            .iter()
            .all(|&c| c == 0));
    }

    #[test]
    fn indivisible_input_rejected() {
        let err = init_params(0).forward(&random_input(0, 6, 8)).unwrap_err();
        assert!(err.to_string().contains("multiples of 4"), "{err}");
    }

    #[test]
    fn forward_is_pure() {
        let p = init_params(4);
        let x = random_input(4, 16, 12);
        assert_eq!(p.forward(&x).unwrap(), p.forward(&x).unwrap());
    }

    #[test]
    fn sgd_arithmetic() {
        let mut p = init_params(5);
        let before = p.clone();
        let mut g = SegNetParams::zeros();
        g.values_mut().for_each(|v| *v = 0.5);
        p.sgd_step(&g, 0.0).unwrap();
        assert_eq!(p, before);
        let mut one = SegNetParams::zeros();
        one.values_mut().for_each(|v| *v = 1.0);
        one.sgd_step(&g, 0.1).unwrap();
        assert!(one.values().all(|&v| (v - 0.95).abs() < 1e-15));
    }

    #[test]
    fn predicted_labels_in_range() {
        let mask = predict_mask(&init_params(6), &random_input(6, 16, 16)).unwrap();
        assert!(mask.data().iter().all(|&c| c <= 2));
    }

    #[test]
    fn doubling_weights_doubles_gradient() {
        let p = init_params(7);
        let x = random_input(7, 8, 8);
        let t = random_mask(7, 8, 8);
        let w = WeightedCrossEntropy::new(ClassWeights::new([0.5, 2.0, 4.0]).unwrap());
        let w2 = WeightedCrossEntropy::new(ClassWeights::new([1.0, 4.0, 8.0]).unwrap());
        let (_, g1) = p.loss_and_gradient(&x, &t, &w).unwrap();
        let (_, g2) = p.loss_and_gradient(&x, &t, &w2).unwrap();
        for (a, b) in g1.values().zip(g2.values()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn confident_correct_prediction_has_tiny_gradient() {
        // Only the output bias is set: class 1 logit +40 everywhere.
        let mut p = SegNetParams::zeros();
        p.layers[4].bias = vec![0.0, 40.0, 0.0];
        let x = random_input(8, 8, 8);
        let t = LabelMask::filled(8, 8, crate::segnet::Class::Crop);
        let (loss, g) = p.loss_and_gradient(&x, &t, &CategoricalCrossEntropy).unwrap();
        assert!(loss < 1e-12);
        assert!(g.norm() < 1e-6);
    }
}
