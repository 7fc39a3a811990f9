//! Synthetic field scenes: noisy brown soil, large green crop plants and
//! small yellow-green weeds, with exact per-pixel labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Class, LabelMask, Sample};
use crate::error::{Error, Result};
use crate::vision::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Target share of weed pixels.
    pub weed_fraction: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 48,
            weed_fraction: 0.02,
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, base: [f64; 3], spread: f64) -> [f64; 3] {
    base.map(|c| c + rng.random_range(-spread..=spread))
}

fn to_u8(c: [f64; 3]) -> [u8; 3] {
    c.map(|v| v.round().clamp(0.0, 255.0) as u8)
}

/// Deterministic scene for `seed`. The realised weed share lands within
/// +-50% of the target for targets of at least ~1%.
pub fn generate_synthetic_scene(seed: u64, spec: &SceneSpec) -> Result<(RgbImage, LabelMask)> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 || w % 4 != 0 || h % 4 != 0 {
        return Err(Error::invalid(format!(
            "scene size must be non-zero multiples of 4, got {w}x{h}"
        )));
    }
    if !(0.0..0.5).contains(&spec.weed_fraction) {
        return Err(Error::invalid("weed_fraction must be in [0, 0.5)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = w * h;
    let scale = (w.min(h) as f64) / 48.0;

    // soil: per-image tint, darker/lighter clods, per-pixel grain
    let soil = jitter(&mut rng, [128.0, 92.0, 62.0], 12.0);
    let mut color: Vec<[f64; 3]> = vec![soil; n];
    for _ in 0..(3.0 + 4.0 * scale * scale) as usize {
        let (cx, cy) = (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64));
        let r = rng.random_range(3.0..9.0) * scale;
        let shift = rng.random_range(-18.0..18.0);
        for y in 0..h {
            for x in 0..w {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                if d2 < r * r {
                    let c = &mut color[y * w + x];
                    *c = c.map(|v| v + shift);
                }
            }
        }
    }
    let mut labels = vec![Class::Soil as u8; n];

    // crops: large ellipses
    let crops = rng.random_range(2..=3) + (scale * scale) as usize;
    for _ in 0..crops {
        let cx = rng.random_range(0.15..0.85) * w as f64;
        let cy = rng.random_range(0.15..0.85) * h as f64;
        let a = rng.random_range(4.0..7.5) * scale;
        let b = rng.random_range(3.5..6.5) * scale;
        let phi: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let (s, c) = phi.sin_cos();
        let leaf = jitter(&mut rng, [48.0, 150.0, 44.0], 10.0);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let (u, v) = (dx * c + dy * s, -dx * s + dy * c);
                if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
                    labels[y * w + x] = Class::Crop as u8;
                    color[y * w + x] = leaf;
                }
            }
        }
    }

    // weeds: clusters of 2-3 small discs, only on soil
    let target = (spec.weed_fraction * n as f64).round() as usize;
    let mut weed_pixels = 0;
    let mut attempts = 0;
    while weed_pixels < target && attempts < 10_000 {
        attempts += 1;
        let cx = rng.random_range(1.0..(w - 1) as f64);
        let cy = rng.random_range(1.0..(h - 1) as f64);
        if labels[cy as usize * w + cx as usize] != Class::Soil as u8 {
            continue;
        }
        let tint = jitter(&mut rng, [112.0, 128.0, 34.0], 10.0);
        for _ in 0..rng.random_range(2..=3) {
            let ox = cx + rng.random_range(-1.5..1.5);
            let oy = cy + rng.random_range(-1.5..1.5);
            let r = rng.random_range(0.9..1.6);
            let (x0, x1) = ((ox - r).floor().max(0.0) as usize, ((ox + r).ceil() as usize).min(w - 1));
            let (y0, y1) = ((oy - r).floor().max(0.0) as usize, ((oy + r).ceil() as usize).min(h - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let d2 = (x as f64 - ox).powi(2) + (y as f64 - oy).powi(2);
                    let i = y * w + x;
                    if d2 <= r * r && labels[i] == Class::Soil as u8 {
                        labels[i] = Class::Weed as u8;
                        color[i] = tint;
                        weed_pixels += 1;
                    }
                }
            }
        }
    }

    let pixels = color
        .into_iter()
        .map(|c| to_u8(jitter(&mut rng, c, 9.0)))
        .collect();
    Ok((RgbImage::new(w, h, pixels)?, LabelMask::new(w, h, labels)?))
}

/// `count` scenes with consecutive seeds starting at `first_seed`.
pub fn synthetic_dataset(first_seed: u64, count: usize, spec: &SceneSpec) -> Result<Vec<Sample>> {
    (0..count as u64)
        .map(|i| {
            let (img, mask) = generate_synthetic_scene(first_seed + i, spec)?;
            Sample::from_image(&img, mask)
        })
        .collect()
}
