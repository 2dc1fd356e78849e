//! Regularly sampled series, change-point sets, and the smoothing filters
//! shared by the detectors.

use crate::error::{invalid_input, invalid_parameter, Error, Result};

/// Classifier scores sampled at a fixed period.
///
/// Entry `i` is observed at `origin + i * sample_period` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    values: Vec<f64>,
    sample_period: f64,
    origin: f64,
}

impl ScoreSeries {
    pub fn new(values: Vec<f64>, sample_period: f64, origin: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid_input("series must contain at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid_input("series values must be finite"));
        }
        check_timing(sample_period, origin)?;
        Ok(Self {
            values,
            sample_period,
            origin,
        })
    }

    /// Convenience constructor with unit period and zero origin.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 1.0, 0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn time_of_index(&self, i: usize) -> Result<f64> {
        time_of_index(self.origin, self.sample_period, self.len(), i)
    }

    /// Nearest sample index for a time, clamped to the series.
    pub fn index_of_time(&self, t: f64) -> usize {
        index_of_time(self.origin, self.sample_period, self.len(), t)
    }

    /// Same timing, new values. Length must match.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: values.len(),
            });
        }
        Self::new(values, self.sample_period, self.origin)
    }
}

/// Binary classifier labels sampled at a fixed period.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSeries {
    labels: Vec<u8>,
    sample_period: f64,
    origin: f64,
}

impl LabelSeries {
    pub fn new(labels: Vec<u8>, sample_period: f64, origin: f64) -> Result<Self> {
        if labels.is_empty() {
            return Err(invalid_input("label series must contain at least one label"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(invalid_input(format!("label {bad} is not 0 or 1")));
        }
        check_timing(sample_period, origin)?;
        Ok(Self {
            labels,
            sample_period,
            origin,
        })
    }

    /// Threshold scores: `score >= threshold` maps to label 1.
    pub fn from_scores(scores: &ScoreSeries, threshold: f64) -> Self {
        Self {
            labels: scores
                .values()
                .iter()
                .map(|&v| u8::from(v >= threshold))
                .collect(),
            sample_period: scores.sample_period,
            origin: scores.origin,
        }
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn time_of_index(&self, i: usize) -> Result<f64> {
        time_of_index(self.origin, self.sample_period, self.len(), i)
    }

    /// Labels as 0.0/1.0 scores with the same timing.
    pub fn to_scores(&self) -> ScoreSeries {
        ScoreSeries {
            values: self.labels.iter().map(|&l| f64::from(l)).collect(),
            sample_period: self.sample_period,
            origin: self.origin,
        }
    }
}

fn check_timing(sample_period: f64, origin: f64) -> Result<()> {
    if !(sample_period.is_finite() && sample_period > 0.0) {
        return Err(invalid_parameter(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    if !(origin.is_finite() && origin >= 0.0) {
        return Err(invalid_parameter(format!(
            "origin must be non-negative, got {origin}"
        )));
    }
    Ok(())
}

/// `origin + i * period`, checked against the series length.
pub fn time_of_index(origin: f64, period: f64, len: usize, i: usize) -> Result<f64> {
    if i >= len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    Ok(origin + i as f64 * period)
}

pub(crate) fn index_of_time(origin: f64, period: f64, len: usize, t: f64) -> usize {
    let raw = ((t - origin) / period).round();
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(len.saturating_sub(1))
    }
}

/// A detected change-point: time in seconds plus an optional diagnostic
/// (p-value, distance, or statistic at detection).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChangePoint {
    pub time: f64,
    pub score: Option<f64>,
}

impl ChangePoint {
    pub fn at(time: f64) -> Self {
        Self { time, score: None }
    }

    pub fn with_score(time: f64, score: f64) -> Self {
        Self {
            time,
            score: Some(score),
        }
    }
}

/// Sorted, deduplicated change-point times tagged with the detector id.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangePointSet {
    detector: String,
    points: Vec<ChangePoint>,
}

impl ChangePointSet {
    /// Sorts by time and drops exact duplicates, keeping the first
    /// diagnostic seen for each time.
    pub fn new(detector: impl Into<String>, mut points: Vec<ChangePoint>) -> Self {
        points.retain(|p| p.time.is_finite());
        points.sort_by(|a, b| a.time.total_cmp(&b.time));
        points.dedup_by(|later, earlier| later.time == earlier.time);
        Self {
            detector: detector.into(),
            points,
        }
    }

    pub fn empty(detector: impl Into<String>) -> Self {
        Self::new(detector, Vec::new())
    }

    pub fn from_times(detector: impl Into<String>, times: &[f64]) -> Self {
        Self::new(detector, times.iter().map(|&t| ChangePoint::at(t)).collect())
    }

    pub fn detector(&self) -> &str {
        &self.detector
    }

    pub fn points(&self) -> &[ChangePoint] {
        &self.points
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.time).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Re-tag with a different detector id.
    pub fn relabel(mut self, detector: impl Into<String>) -> Self {
        self.detector = detector.into();
        self
    }
}

/// Centered running median with symmetric window shrinkage at the edges.
///
/// Interior points use radius `(window - 1) / 2`, so the effective window is
/// always odd. Near an edge the radius shrinks to the distance from the edge.
pub fn median_filter(s: &ScoreSeries, window: usize) -> Result<ScoreSeries> {
    if window == 0 {
        return Err(invalid_parameter("median window must be at least 1"));
    }
    let values = median_filter_values(s.values(), window);
    s.with_values(values)
}

pub(crate) fn median_filter_values(x: &[f64], window: usize) -> Vec<f64> {
    let half = window.saturating_sub(1) / 2;
    let n = x.len();
    let mut buf = Vec::with_capacity(2 * half + 1);
    (0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            buf.clear();
            buf.extend_from_slice(&x[i - r..=i + r]);
            median_in_place(&mut buf)
        })
        .collect()
}

/// Median; mean of the two middle values for even length.
pub(crate) fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    debug_assert!(n > 0);
    buf.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

/// Savitzky-Golay smoothing: each point is replaced by the value at the
/// window center of a least-squares polynomial fit.
///
/// The window shrinks symmetrically near the edges; the fitted degree is
/// capped at `2r` for a shrunken radius `r`, so the first and last samples
/// pass through unchanged.
pub fn savitzky_golay(s: &ScoreSeries, window: usize, order: usize) -> Result<ScoreSeries> {
    let values = savitzky_golay_values(s.values(), window, order)?;
    s.with_values(values)
}

pub(crate) fn savitzky_golay_values(x: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(invalid_parameter(format!(
            "Savitzky-Golay window must be odd and positive, got {window}"
        )));
    }
    if order >= window {
        return Err(invalid_parameter(format!(
            "Savitzky-Golay order {order} must be below the window {window}"
        )));
    }
    let half = window / 2;
    let n = x.len();
    // One weight vector per radius, built lazily.
    let mut weights: Vec<Option<Vec<f64>>> = vec![None; half + 1];
    Ok((0..n)
        .map(|i| {
            let r = half.min(i).min(n - 1 - i);
            let w = weights[r].get_or_insert_with(|| center_fit_weights(r, order.min(2 * r)));
            w.iter().zip(&x[i - r..=i + r]).map(|(w, v)| w * v).sum()
        })
        .collect())
}

/// Weights `w` such that `w . y` is the degree-`degree` least-squares fit
/// evaluated at the center of `2r + 1` equally spaced samples.
///
/// Built from an orthonormal basis of the sampled monomials (modified
/// Gram-Schmidt, applied twice).
fn center_fit_weights(r: usize, degree: usize) -> Vec<f64> {
    let m = 2 * r + 1;
    let scale = r.max(1) as f64;
    let xs: Vec<f64> = (0..m).map(|j| (j as f64 - r as f64) / scale).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    for k in 0..=degree {
        let mut v: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
        for _ in 0..2 {
            for q in &basis {
                let dot: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= dot * qi);
            }
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|vi| *vi /= norm);
        basis.push(v);
    }
    (0..m)
        .map(|j| basis.iter().map(|q| q[r] * q[j]).sum())
        .collect()
}
