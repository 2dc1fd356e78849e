//! Windowed precision and recall.
//!
//! A true point counts as found when any predicted point lies within the
//! window of it, and a predicted point counts as correct when any true point
//! lies within the window. There is no one-to-one assignment. Totals are
//! summed over videos before dividing.

use crate::error::{invalid_input, invalid_parameter, Result};
use crate::series::ChangePointSet;

/// Match counts for one video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VideoCounts {
    pub true_total: usize,
    pub true_matched: usize,
    pub predicted_total: usize,
    pub predicted_matched: usize,
}

impl VideoCounts {
    pub fn recall(&self) -> f64 {
        ratio(self.true_matched, self.true_total)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.predicted_matched, self.predicted_total)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub true_total: usize,
    pub predicted_total: usize,
    pub true_matched: usize,
    pub predicted_matched: usize,
    pub recall: f64,
    pub precision: f64,
    pub window: f64,
}

pub const DEFAULT_WINDOW: f64 = 10.0;

fn any_within(times: &[f64], t: f64, window: f64) -> bool {
    times.iter().any(|&v| (v - t).abs() <= window)
}

pub fn evaluate(predicted: &ChangePointSet, truth: &ChangePointSet, window: f64) -> Result<VideoCounts> {
    if !(window.is_finite() && window >= 0.0) {
        return Err(invalid_parameter(format!("window must be non-negative, got {window}")));
    }
    let p = predicted.times();
    let t = truth.times();
    Ok(VideoCounts {
        true_total: t.len(),
        true_matched: t.iter().filter(|&&x| any_within(&p, x, window)).count(),
        predicted_total: p.len(),
        predicted_matched: p.iter().filter(|&&x| any_within(&t, x, window)).count(),
    })
}

pub fn aggregate(counts: &[VideoCounts], window: f64) -> Result<EvalReport> {
    if counts.is_empty() {
        return Err(invalid_input("nothing to aggregate"));
    }
    let sum = counts.iter().fold(VideoCounts::default(), |a, c| VideoCounts {
        true_total: a.true_total + c.true_total,
        true_matched: a.true_matched + c.true_matched,
        predicted_total: a.predicted_total + c.predicted_total,
        predicted_matched: a.predicted_matched + c.predicted_matched,
    });
    Ok(EvalReport {
        true_total: sum.true_total,
        predicted_total: sum.predicted_total,
        true_matched: sum.true_matched,
        predicted_matched: sum.predicted_matched,
        recall: sum.recall(),
        precision: sum.precision(),
        window,
    })
}
