use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sliding-window median. During warm-up the median is taken over whatever
/// samples have arrived; an even count averages the two middle values.
#[derive(Debug, Clone)]
pub struct MedianFilter {
    window: usize,
    buffer: VecDeque<f64>,
}

impl MedianFilter {
    pub fn new(window: usize) -> Result<Self> {
        if window == 0 {
            return Err(Error::invalid("median window must be >= 1"));
        }
        Ok(Self {
            window,
            buffer: VecDeque::with_capacity(window),
        })
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn reset(&mut self) {
        self.buffer.clear();
    }

    pub fn step(&mut self, z: f64) -> f64 {
        self.push(z);
        median_of(self.buffer.iter().copied())
    }

    /// Median of the window after mapping every sample through `f`.
    pub(crate) fn step_mapped(&mut self, z: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.push(z);
        median_of(self.buffer.iter().map(|&v| f(v)))
    }

    fn push(&mut self, z: f64) {
        if self.buffer.len() == self.window {
            self.buffer.pop_front();
        }
        self.buffer.push_back(z);
    }
}

fn median_of(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
