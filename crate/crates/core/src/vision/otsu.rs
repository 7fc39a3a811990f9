pub const OTSU_BINS: usize = 256;

/// Binary plane, 1 = vegetation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VegetationMask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl VegetationMask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v == 1).count()
    }
}

pub(crate) fn bin_of(v: f64) -> usize {
    (v.clamp(0.0, 1.0) * (OTSU_BINS - 1) as f64).round() as usize
}

/// Otsu threshold over 256 bins of a [0, 1] plane. Returns the bin `t` such
/// that pixels with bin >= t form the foreground, or `None` when no split has
/// positive between-class variance. Ties go to the lowest bin.
pub fn otsu_threshold(plane: &[f64]) -> Option<usize> {
    let mut hist = [0u64; OTSU_BINS];
    for &v in plane {
        hist[bin_of(v)] += 1;
    }
    let total = plane.len() as f64;
    if total == 0.0 {
        return None;
    }
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();

    let mut best: Option<(usize, f64)> = None;
    let (mut w0, mut sum0) = (0.0, 0.0);
    for t in 1..OTSU_BINS {
        w0 += hist[t - 1] as f64;
        sum0 += (t - 1) as f64 * hist[t - 1] as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let mu0 = sum0 / w0;
        let mu1 = (sum_all - sum0) / w1;
        let between = (w0 / total) * (w1 / total) * (mu0 - mu1).powi(2);
        if between > 0.0 && best.is_none_or(|(_, b)| between > b) {
            best = Some((t, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Threshold-based vegetation mask of an ExG plane.
pub fn otsu_vegetation_mask(plane: &[f64], width: usize, height: usize) -> VegetationMask {
    let data = match otsu_threshold(plane) {
        Some(t) => plane.iter().map(|&v| u8::from(bin_of(v) >= t)).collect(),
        None => vec![0; plane.len()],
    };
    VegetationMask {
        width,
        height,
        data,
    }
}
