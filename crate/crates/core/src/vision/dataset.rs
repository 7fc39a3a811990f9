//! Image IO and image/mask dataset ingestion.
//!
//! A dataset directory holds `images/` and `masks/`. Every image
//! `images/<stem>.<png|ppm>` must have a mask `masks/<stem>.png` whose gray
//! values are class indices (0 = soil, 1 = crop, 2 = weed).

use std::fs;
use std::path::{Path, PathBuf};

use super::RgbImage;
use crate::error::{Error, Result};
use crate::segnet::LabelMask;

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "ppm", "pnm"];

/// Soil, crop, weed overlay colors.
pub const CLASS_COLORS: [[u8; 3]; 3] = [[0, 0, 255], [0, 255, 0], [255, 0, 0]];

#[derive(Debug, Clone)]
pub struct LabeledImage {
    pub name: String,
    pub image: RgbImage,
    pub mask: LabelMask,
}

fn image_err(path: &Path, source: image::ImageError) -> Error {
    Error::Image {
        path: path.to_owned(),
        source,
    }
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_rgb8();
    let (w, h) = img.dimensions();
    let pixels = img.pixels().map(|p| p.0).collect();
    RgbImage::new(w as usize, h as usize, pixels)
}

/// Format follows the extension (`.png` or `.ppm`).
pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let flat: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, flat)
        .expect("pixel buffer matches dimensions");
    buf.save(path).map_err(|e| image_err(path, e))
}

pub fn load_label_mask(path: &Path) -> Result<LabelMask> {
    let img = image::open(path).map_err(|e| image_err(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    LabelMask::new(w as usize, h as usize, img.into_raw())
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
}

pub fn save_label_mask(mask: &LabelMask, path: &Path) -> Result<()> {
    let buf = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, mask.data().to_vec())
        .expect("mask buffer matches dimensions");
    buf.save(path).map_err(|e| image_err(path, e))
}

/// Writes the mask with the soil/crop/weed overlay palette.
pub fn save_mask_color(mask: &LabelMask, path: &Path) -> Result<()> {
    let img = mask_to_color(mask);
    save_rgb(&img, path)
}

pub fn mask_to_color(mask: &LabelMask) -> RgbImage {
    let pixels = mask.data().iter().map(|&c| CLASS_COLORS[c as usize]).collect();
    RgbImage::new(mask.width(), mask.height(), pixels).expect("mask is non-empty")
}

/// Encodes the colored mask as PNG bytes.
pub fn mask_png_bytes(mask: &LabelMask) -> Vec<u8> {
    let img = mask_to_color(mask);
    let flat: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    let mut out = std::io::Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut out,
        &flat,
        img.width() as u32,
        img.height() as u32,
        image::ExtendedColorType::Rgb8,
        image::ImageFormat::Png,
    )
    .expect("in-memory PNG encoding");
    out.into_inner()
}

/// Sorted list of image files directly inside `dir`.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if path.is_file() && ext.is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.as_str())) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

pub fn load_dataset(dir: &Path) -> Result<Vec<LabeledImage>> {
    let images = list_images(&dir.join("images"))?;
    if images.is_empty() {
        return Err(Error::Empty("dataset has no images"));
    }
    let mut out = Vec::with_capacity(images.len());
    for path in images {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let mask_path = dir.join("masks").join(format!("{stem}.png"));
        let image = load_rgb(&path)?;
        let mask = load_label_mask(&mask_path)?;
        if (mask.width(), mask.height()) != (image.width(), image.height()) {
            return Err(Error::ShapeMismatch(format!(
                "{stem}: image {}x{} vs mask {}x{}",
                image.width(),
                image.height(),
                mask.width(),
                mask.height()
            )));
        }
        out.push(LabeledImage {
            name: stem,
            image,
            mask,
        });
    }
    Ok(out)
}
