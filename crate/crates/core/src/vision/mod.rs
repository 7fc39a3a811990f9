//! Camera-side image handling: the 10-channel vegetation representation,
//! an Otsu vegetation-mask baseline and image/dataset IO.

mod channels;
mod dataset;
mod otsu;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub use channels::{
    build_channel_stack, rgb_to_hsv, vegetation_indices, Channel, ChannelStack, VegetationIndices,
    CHANNEL_COUNT,
};
pub use dataset::{
    list_images, load_dataset, load_label_mask, load_rgb, mask_png_bytes, mask_to_color,
    save_label_mask, save_mask_color, save_rgb, LabeledImage, CLASS_COLORS,
};
pub use otsu::{otsu_threshold, otsu_vegetation_mask, VegetationMask, OTSU_BINS};

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty("image has zero width or height"));
        }
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [[u8; 3]] {
        &mut self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, rgb: [u8; 3]) {
        self.pixels[row * self.width + col] = rgb;
    }

    /// Independent Gaussian noise on every component, rounded and saturated.
    pub fn add_pixel_noise<R: Rng>(&mut self, sigma: f64, rng: &mut R) {
        if sigma <= 0.0 {
            return;
        }
        for px in &mut self.pixels {
            for c in px.iter_mut() {
                let eta: f64 = StandardNormal.sample(rng);
                *c = (*c as f64 + sigma * eta).round().clamp(0.0, 255.0) as u8;
            }
        }
    }
}
