use serde::{Deserialize, Serialize};

use super::{wrap_angle, Kalman1D, MedianFilter};
use crate::error::Result;
use crate::registry::Registry;

/// A scalar signal filter that can be swapped at runtime.
pub trait HeadingFilter: Send {
    fn name(&self) -> &'static str;
    /// Feeds one measurement and returns the filtered value.
    fn update(&mut self, z: f64) -> f64;
    fn reset(&mut self);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterParams {
    pub median_window: usize,
    pub kalman_q: f64,
    pub kalman_r: f64,
    /// Treat the signal as an angle (wrapped innovations and medians).
    pub angular: bool,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            median_window: 5,
            kalman_q: 1e-3,
            kalman_r: 2.5e-3,
            angular: true,
        }
    }
}

pub type FilterRegistry = Registry<dyn HeadingFilter, FilterParams>;

/// Registry with the built-in filters: `raw`, `median` and `kalman`.
pub fn filter_registry() -> FilterRegistry {
    let mut reg = FilterRegistry::new("heading filter");
    reg.register("raw", |_| Ok(Box::new(Passthrough)));
    reg.register("median", |p: &FilterParams| {
        Ok(Box::new(MovingMedian::new(p.median_window, p.angular)?))
    });
    reg.register("kalman", |p: &FilterParams| {
        let k = Kalman1D::new(p.kalman_q, p.kalman_r)?;
        Ok(Box::new(if p.angular {
            KalmanFilter::angular(k)
        } else {
            KalmanFilter::linear(k)
        }))
    });
    reg
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Passthrough;

impl HeadingFilter for Passthrough {
    fn name(&self) -> &'static str {
        "raw"
    }

    fn update(&mut self, z: f64) -> f64 {
        z
    }

    fn reset(&mut self) {}
}

/// Moving median. For angles the window is unwrapped around the newest
/// sample before taking the median, so a window straddling +-pi stays sane.
#[derive(Debug, Clone)]
pub struct MovingMedian {
    inner: MedianFilter,
    angular: bool,
}

impl MovingMedian {
    pub fn new(window: usize, angular: bool) -> Result<Self> {
        Ok(Self {
            inner: MedianFilter::new(window)?,
            angular,
        })
    }
}

impl HeadingFilter for MovingMedian {
    fn name(&self) -> &'static str {
        "median"
    }

    fn update(&mut self, z: f64) -> f64 {
        if !self.angular {
            return self.inner.step(z);
        }
        let reference = wrap_angle(z);
        let offset = self
            .inner
            .step_mapped(reference, |v| wrap_angle(v - reference));
        wrap_angle(reference + offset)
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}

#[derive(Debug, Clone)]
pub struct KalmanFilter {
    inner: Kalman1D,
    angular: bool,
}

impl KalmanFilter {
    pub fn angular(inner: Kalman1D) -> Self {
        Self {
            inner,
            angular: true,
        }
    }

    pub fn linear(inner: Kalman1D) -> Self {
        Self {
            inner,
            angular: false,
        }
    }

    pub fn state(&self) -> &Kalman1D {
        &self.inner
    }
}

impl HeadingFilter for KalmanFilter {
    fn name(&self) -> &'static str {
        "kalman"
    }

    fn update(&mut self, z: f64) -> f64 {
        self.inner.step(z, self.angular)
    }

    fn reset(&mut self) {
        self.inner.reset();
    }
}
