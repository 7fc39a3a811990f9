//! Confusion-matrix metrics for soil / crop / weed segmentation.
//!
//! Conventions: a ratio with a zero denominator (the class never occurs and
//! is never predicted) counts as 1, so perfect prediction is all ones.
//! `mAccuracy` is overall pixel accuracy; the mean per-class recall is
//! reported alongside it.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segnet::{Class, LabelMask, NUM_CLASSES};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts(counts: [[u64; NUM_CLASSES]; NUM_CLASSES]) -> Self {
        Self { counts }
    }

    pub fn accumulate(&mut self, pred: &LabelMask, truth: &LabelMask) -> Result<()> {
        if (pred.width(), pred.height()) != (truth.width(), truth.height()) {
            return Err(Error::ShapeMismatch(format!(
                "prediction {}x{} vs truth {}x{}",
                pred.width(),
                pred.height(),
                truth.width(),
                truth.height()
            )));
        }
        for (&p, &t) in pred.data().iter().zip(truth.data()) {
            self.counts[t as usize][p as usize] += 1;
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    pub fn false_positives(&self, c: usize) -> u64 {
        (0..NUM_CLASSES).filter(|&t| t != c).map(|t| self.counts[t][c]).sum()
    }

    pub fn false_negatives(&self, c: usize) -> u64 {
        (0..NUM_CLASSES).filter(|&p| p != c).map(|p| self.counts[c][p]).sum()
    }

    pub fn precision(&self, c: usize) -> f64 {
        let tp = self.true_positives(c);
        ratio(tp, tp + self.false_positives(c))
    }

    pub fn recall(&self, c: usize) -> f64 {
        let tp = self.true_positives(c);
        ratio(tp, tp + self.false_negatives(c))
    }

    /// `(precision, recall)` per class index.
    pub fn precision_recall(&self) -> [(f64, f64); NUM_CLASSES] {
        std::array::from_fn(|c| (self.precision(c), self.recall(c)))
    }

    pub fn iou(&self, c: usize) -> f64 {
        let tp = self.true_positives(c);
        ratio(tp, tp + self.false_positives(c) + self.false_negatives(c))
    }

    pub fn mean_iou(&self) -> f64 {
        (0..NUM_CLASSES).map(|c| self.iou(c)).sum::<f64>() / NUM_CLASSES as f64
    }

    /// Overall pixel accuracy, trace / total.
    pub fn mean_accuracy(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Empty("confusion matrix"));
        }
        let trace: u64 = (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum();
        Ok(trace as f64 / total as f64)
    }

    pub fn mean_class_recall(&self) -> f64 {
        (0..NUM_CLASSES).map(|c| self.recall(c)).sum::<f64>() / NUM_CLASSES as f64
    }

    pub fn summary(&self) -> Result<MetricsSummary> {
        Ok(MetricsSummary {
            accuracy: self.mean_accuracy()?,
            mean_iou: self.mean_iou(),
            precision: std::array::from_fn(|c| self.precision(c)),
            recall: std::array::from_fn(|c| self.recall(c)),
            mean_class_recall: self.mean_class_recall(),
        })
    }
}

impl Add for ConfusionMatrix {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.counts.iter_mut().flatten().zip(rhs.counts.iter().flatten()) {
            *a += b;
        }
    }
}

/// Metric values in [0, 1], indexed by class (soil, crop, weed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub accuracy: f64,
    pub mean_iou: f64,
    pub precision: [f64; NUM_CLASSES],
    pub recall: [f64; NUM_CLASSES],
    pub mean_class_recall: f64,
}

impl MetricsSummary {
    /// Values in report column order: mAccuracy, mIoU, precision
    /// soil/weed/crop, recall soil/weed/crop, as percentages.
    pub fn report_cells(&self) -> [f64; 8] {
        let order = [Class::Soil, Class::Weed, Class::Crop].map(Class::index);
        let mut cells = [0.0; 8];
        cells[0] = self.accuracy;
        cells[1] = self.mean_iou;
        for (i, &c) in order.iter().enumerate() {
            cells[2 + i] = self.precision[c];
            cells[5 + i] = self.recall[c];
        }
        cells.map(|v| v * 100.0)
    }
}

pub const REPORT_HEADER: [&str; 8] = [
    "mAccuracy [%]",
    "mIoU [%]",
    "Precision Soil [%]",
    "Precision Weed [%]",
    "Precision Crop [%]",
    "Recall Soil [%]",
    "Recall Weed [%]",
    "Recall Crop [%]",
];

/// Tab-separated table with one row, two decimals per cell, followed by the
/// mean per-class recall line.
pub fn report_table(label: &str, m: &MetricsSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Model\t{}", REPORT_HEADER.join("\t"));
    let cells: Vec<String> = m.report_cells().iter().map(|v| format!("{v:.2}")).collect();
    let _ = writeln!(out, "{label}\t{}", cells.join("\t"));
    let _ = writeln!(out, "mean per-class recall [%]: {:.2}", m.mean_class_recall * 100.0);
    out
}

/// Same columns as [`report_table`], comma-separated, no trailing line.
pub fn report_csv(label: &str, m: &MetricsSummary) -> String {
    let cells: Vec<String> = m.report_cells().iter().map(|v| format!("{v:.2}")).collect();
    format!(
        "model,{},mean_class_recall\n{label},{},{:.2}\n",
        REPORT_HEADER.join(","),
        cells.join(","),
        m.mean_class_recall * 100.0
    )
}
