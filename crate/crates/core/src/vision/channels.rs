use super::RgbImage;
use crate::error::Result;

pub const CHANNEL_COUNT: usize = 10;

/// Plane order of a [`ChannelStack`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    R = 0,
    G,
    B,
    H,
    S,
    V,
    ExG,
    ExR,
    Cive,
    Ndi,
}

impl Channel {
    pub const ALL: [Channel; CHANNEL_COUNT] = [
        Channel::R,
        Channel::G,
        Channel::B,
        Channel::H,
        Channel::S,
        Channel::V,
        Channel::ExG,
        Channel::ExR,
        Channel::Cive,
        Channel::Ndi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::R => "R",
            Channel::G => "G",
            Channel::B => "B",
            Channel::H => "H",
            Channel::S => "S",
            Channel::V => "V",
            Channel::ExG => "ExG",
            Channel::ExR => "ExR",
            Channel::Cive => "CIVE",
            Channel::Ndi => "NDI",
        }
    }
}

/// Standard RGB to HSV, all outputs in [0, 1]. Hue is 0 for achromatic pixels.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let v = max;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta == 0.0 {
        return (0.0, s, v);
    }
    let sector = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    ((sector / 6.0).rem_euclid(1.0), s, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VegetationIndices {
    pub exg: f64,
    pub exr: f64,
    pub cive: f64,
    pub ndi: f64,
}

/// Raw (unnormalized) vegetation indices of one pixel.
///
/// * ExG  = 2g - r - b
/// * ExR  = 1.4r - g
/// * CIVE = 0.441r - 0.811g + 0.385b + 18.78745
/// * NDI  = (G - R) / (G + R)
///
/// `r, g, b` are chromatic coordinates (component / component sum). A black
/// pixel takes r = g = b = 1/3 and `G + R = 0` gives NDI = 0.
pub fn vegetation_indices(rgb: [u8; 3]) -> VegetationIndices {
    let [rr, gg, bb] = rgb.map(|c| c as f64);
    let sum = rr + gg + bb;
    let (r, g, b) = if sum > 0.0 {
        (rr / sum, gg / sum, bb / sum)
    } else {
        (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    };
    let ndi = if gg + rr > 0.0 {
        (gg - rr) / (gg + rr)
    } else {
        0.0
    };
    VegetationIndices {
        exg: 2.0 * g - r - b,
        exr: 1.4 * r - g,
        cive: 0.441 * r - 0.811 * g + 0.385 * b + 18.78745,
        ndi,
    }
}

/// Ten planes of height x width values in [0, 1], stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ChannelStack {
    /// Builds a stack from raw planar data (`CHANNEL_COUNT * height * width`).
    pub fn from_planes(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != CHANNEL_COUNT * width * height {
            return Err(crate::Error::ShapeMismatch(format!(
                "{} values for 10x{height}x{width}",
                data.len()
            )));
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

    pub fn channels(&self) -> usize {
        CHANNEL_COUNT
    }

    pub fn plane(&self, c: Channel) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c as usize * n..(c as usize + 1) * n]
    }

    /// All planes, channel-major.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn min_max_normalize(plane: &mut [f64]) {
    let (lo, hi) = plane
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range <= 1e-12 {
        plane.fill(0.0);
        return;
    }
    for v in plane.iter_mut() {
        *v = ((*v - lo) / range).clamp(0.0, 1.0);
    }
}

/// RGB scaled by 1/255, HSV as computed, the four indices min-max
/// normalized per image (a constant plane becomes all zeros).
pub fn build_channel_stack(img: &RgbImage) -> ChannelStack {
    let n = img.width() * img.height();
    let mut data = vec![0.0; CHANNEL_COUNT * n];
    for (i, &px) in img.pixels().iter().enumerate() {
        let (h, s, v) = rgb_to_hsv(px);
        let idx = vegetation_indices(px);
        let values = [
            px[0] as f64 / 255.0,
            px[1] as f64 / 255.0,
            px[2] as f64 / 255.0,
            h,
            s,
            v,
            idx.exg,
            idx.exr,
            idx.cive,
            idx.ndi,
        ];
        for (c, val) in values.into_iter().enumerate() {
            data[c * n + i] = val;
        }
    }
    for c in [Channel::ExG, Channel::ExR, Channel::Cive, Channel::Ndi] {
        min_max_normalize(&mut data[c as usize * n..(c as usize + 1) * n]);
    }
    ChannelStack {
        width: img.width(),
        height: img.height(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn hsv_examples() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), (0.0, 1.0, 1.0));
        let (h, s, v) = rgb_to_hsv([0, 255, 0]);
        assert_abs_diff_eq!(h, 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!((s, v), (1.0, 1.0));
        assert_eq!(rgb_to_hsv([128, 128, 128]), (0.0, 0.0, 128.0 / 255.0));
        let (h, _, _) = rgb_to_hsv([0, 0, 255]);
        assert_abs_diff_eq!(h, 2.0 / 3.0, epsilon = 1e-12);
        let (h, _, _) = rgb_to_hsv([255, 0, 255]);
        assert_abs_diff_eq!(h, 5.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn index_examples() {
        let gray = vegetation_indices([90, 90, 90]);
        assert_abs_diff_eq!(gray.exg, 0.0, epsilon = 1e-12);
        assert_eq!(gray.ndi, 0.0);

        let green = vegetation_indices([0, 255, 0]);
        assert_abs_diff_eq!(green.exg, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(green.exr, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(green.ndi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(green.cive, 17.97645, epsilon = 1e-9);

        let black = vegetation_indices([0, 0, 0]);
        assert_abs_diff_eq!(black.exg, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(black.cive, 18.79245, epsilon = 1e-9);
        assert_eq!(black.ndi, 0.0);
    }

    #[test]
    fn stack_shape_at_camera_resolution() {
        let img = RgbImage::filled(512, 384, [10, 200, 30]).unwrap();
        let s = build_channel_stack(&img);
        assert_eq!((s.channels(), s.height(), s.width()), (10, 384, 512));
        assert_eq!(s.as_slice().len(), 10 * 384 * 512);
    }

    #[test]
    fn gray_image_gives_zero_exg_plane() {
        let img = RgbImage::filled(4, 3, [77, 77, 77]).unwrap();
        let s = build_channel_stack(&img);
        assert!(s.plane(Channel::ExG).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_pixel_min_max() {
        // gray -> ExG 0, pure green -> ExG 2
        let img = RgbImage::new(2, 1, vec![[50, 50, 50], [0, 255, 0]]).unwrap();
        let s = build_channel_stack(&img);
        assert_eq!(s.plane(Channel::ExG), &[0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn stack_values_in_unit_interval(pixels in prop::collection::vec(any::<[u8; 3]>(), 12)) {
            let img = RgbImage::new(4, 3, pixels).unwrap();
            let s = build_channel_stack(&img);
            prop_assert!(s.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn exg_scale_invariant(r in 1u8..=25, g in 1u8..=25, b in 1u8..=25, k in 1u8..=10) {
            let a = vegetation_indices([r, g, b]);
            let s = vegetation_indices([r * k, g * k, b * k]);
            prop_assert!((a.exg - s.exg).abs() < 1e-12);
        }

        #[test]
        fn greener_means_more_exg_less_cive(r in 0u8..=255, g in 1u8..=254, b in 0u8..=255, dg in 1u8..=255) {
            let g2 = g.saturating_add(dg);
            prop_assume!(g2 > g);
            let lo = vegetation_indices([r, g, b]);
            let hi = vegetation_indices([r, g2, b]);
            if r as u32 + b as u32 > 0 {
                prop_assert!(hi.exg > lo.exg);
                prop_assert!(hi.cive < lo.cive);
            }
        }
    }
}
