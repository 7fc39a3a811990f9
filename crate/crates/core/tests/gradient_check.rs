use agrobench::segnet::{
    init_params, CategoricalCrossEntropy, ClassWeights, LabelMask, SegLoss, SegNetParams,
    WeightedCrossEntropy,
};
use agrobench::vision::ChannelStack;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(seed: u64, w: usize, h: usize) -> (ChannelStack, LabelMask) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..10 * w * h).map(|_| rng.random::<f64>()).collect();
    let labels = (0..w * h).map(|_| rng.random_range(0..3u8)).collect();
    (ChannelStack::from_planes(w, h, data).unwrap(), LabelMask::new(w, h, labels).unwrap())
}

/// Central differences over every parameter.
fn numeric_gradient(p: &SegNetParams, x: &ChannelStack, t: &LabelMask, loss: &dyn SegLoss, eps: f64) -> Vec<f64> {
    let base = p.to_flat();
    let mut q = p.clone();
    let mut flat = base.clone();
    (0..base.len())
        .map(|i| {
            flat[i] = base[i] + eps;
            q.set_flat(&flat).unwrap();
            let up = q.loss(x, t, loss).unwrap();
            flat[i] = base[i] - eps;
            q.set_flat(&flat).unwrap();
            let down = q.loss(x, t, loss).unwrap();
            flat[i] = base[i];
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Largest per-component relative error; components where both sides are
/// exactly zero count as agreeing.
fn worst_relative_error(a: &[f64], n: &[f64]) -> f64 {
    a.iter()
        .zip(n)
        .map(|(a, n)| {
            let scale = a.abs().max(n.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - n).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

fn check(loss: &dyn SegLoss) {
    for seed in 0..3 {
        let (x, t) = random_case(100 + seed, 8, 8);
        let p = init_params(seed);
        let (_, g) = p.loss_and_gradient(&x, &t, loss).unwrap();
        let numeric = numeric_gradient(&p, &x, &t, loss, 1e-4);
        let err = worst_relative_error(&g.to_flat(), &numeric);
        assert!(err <= 1e-4, "{} seed {seed}: worst relative error {err:e}", loss.name());
    }
}

#[test]
fn cce_gradient_matches_finite_differences() {
    check(&CategoricalCrossEntropy);
}

#[test]
fn wcce_gradient_matches_finite_differences() {
    check(&WeightedCrossEntropy::new(ClassWeights::new([0.4, 3.0, 15.0]).unwrap()));
}

#[test]
fn rectangular_input() {
    let (x, t) = random_case(7, 12, 8);
    let p = init_params(9);
    let loss = CategoricalCrossEntropy;
    let (_, g) = p.loss_and_gradient(&x, &t, &loss).unwrap();
    let err = worst_relative_error(&g.to_flat(), &numeric_gradient(&p, &x, &t, &loss, 1e-4));
    assert!(err <= 1e-4, "{err:e}");
}
