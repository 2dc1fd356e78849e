//! Change-point detection on histogram sequences.
//!
//! The chi-squared and match-distance detectors use the future-window rule
//! with a histogram baseline: the first frame initially, then the frame at
//! the start of each window that triggered a change-point. The multivariate
//! MSE detector sums the univariate split statistic over bins.

use statrs::function::gamma::gamma_ur;

use crate::bovw::Histogram;
use crate::detect::mse::{binary_segmentation, exp_tail, SplitModel, UnivariateScan};
use crate::detect::{round_filter, MseConfig};
use crate::error::{invalid_input, invalid_parameter, Error, Result};
use crate::series::{median_filter_values, time_of_index, ChangePoint, ChangePointSet};

/// Frames of a fixed bin count, sampled at a fixed period.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSeries {
    bins: usize,
    data: Vec<f64>,
    sample_period: f64,
    origin: f64,
}

impl HistogramSeries {
    pub fn new(frames: Vec<Vec<f64>>, bins: usize, sample_period: f64, origin: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(invalid_input("histogram series needs at least one frame"));
        }
        if bins == 0 {
            return Err(invalid_input("histograms need at least one bin"));
        }
        if !(sample_period.is_finite() && sample_period > 0.0) || !(origin.is_finite() && origin >= 0.0) {
            return Err(invalid_parameter("period must be positive and origin non-negative"));
        }
        let mut data = Vec::with_capacity(frames.len() * bins);
        for f in frames {
            if f.len() != bins {
                return Err(Error::DimensionMismatch {
                    expected: bins,
                    found: f.len(),
                });
            }
            if f.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid_input("histogram bins must be finite and non-negative"));
            }
            data.extend(f);
        }
        Ok(Self {
            bins,
            data,
            sample_period,
            origin,
        })
    }

    pub fn from_histograms(frames: &[Histogram], sample_period: f64, origin: f64) -> Result<Self> {
        let bins = frames.first().map_or(0, Histogram::len);
        Self::new(
            frames.iter().map(|h| h.bins().to_vec()).collect(),
            bins,
            sample_period,
            origin,
        )
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.bins
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.bins..(t + 1) * self.bins]
    }

    pub fn frames(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.bins)
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

    /// Values of one bin across all frames.
    pub fn bin_series(&self, b: usize) -> Vec<f64> {
        self.frames().map(|f| f[b]).collect()
    }
}

/// Chi-squared statistic, degrees of freedom and upper-tail p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi2 {
    pub stat: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Floor used for an empty expected bin when the observed bin is not empty.
pub const EMPTY_EXPECTED_FLOOR: f64 = 0.5;

/// Goodness of fit of `observed` against `expected`.
///
/// Bins empty in both histograms are dropped from the sum and from the
/// degrees of freedom. An empty expected bin with observed mass uses
/// [`EMPTY_EXPECTED_FLOOR`] as its expectation.
pub fn chi2_stat(observed: &[f64], expected: &[f64]) -> Result<Chi2> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch {
            expected: expected.len(),
            found: observed.len(),
        });
    }
    let mut stat = 0.0;
    let mut k = 0usize;
    for (&o, &e) in observed.iter().zip(expected) {
        if e == 0.0 && o == 0.0 {
            continue;
        }
        let e = if e == 0.0 { EMPTY_EXPECTED_FLOOR } else { e };
        stat += (o - e) * (o - e) / e;
        k += 1;
    }
    let df = k.saturating_sub(1);
    Ok(Chi2 {
        stat,
        df,
        p_value: chi2_upper_tail(stat, df),
    })
}

/// `P(X >= stat)` for `X ~ chi-squared(df)`; `df = 0` is a point mass at 0.
pub fn chi2_upper_tail(stat: f64, df: usize) -> f64 {
    if stat <= 0.0 {
        return 1.0;
    }
    if df == 0 {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, stat / 2.0)
}

/// L1 distance between the cumulative sums of two histograms.
pub fn match_distance(h: &[f64], k: &[f64]) -> Result<f64> {
    if h.len() != k.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: k.len(),
        });
    }
    let (mut ch, mut ck, mut d) = (0.0, 0.0, 0.0);
    for (a, b) in h.iter().zip(k) {
        ch += a;
        ck += b;
        d += (ch - ck).abs();
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistMethod {
    /// Fire when every window p-value is below `alpha`.
    Chi2 { alpha: f64 },
    /// Fire when every window distance exceeds `constant` times the mean
    /// absolute successive difference summed over bins.
    Match { constant: f64 },
}

impl HistMethod {
    pub fn id(self) -> &'static str {
        match self {
            HistMethod::Chi2 { .. } => "chi2",
            HistMethod::Match { .. } => "match",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiConfig {
    pub method: HistMethod,
    pub future_window: usize,
    pub round_granularity: Option<f64>,
}

impl MultiConfig {
    /// Chi-squared defaults: alpha 0.001, window 7, no rounding.
    pub fn chi2() -> Self {
        Self {
            method: HistMethod::Chi2 { alpha: 0.001 },
            future_window: 7,
            round_granularity: None,
        }
    }

    /// Match-distance defaults: constant 20, window 10, rounding to 1 s.
    pub fn matching() -> Self {
        Self {
            method: HistMethod::Match { constant: 20.0 },
            future_window: 10,
            round_granularity: Some(1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            HistMethod::Chi2 { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                return Err(invalid_parameter(format!("alpha must be in (0, 1), got {alpha}")))
            }
            HistMethod::Match { constant } if !(constant.is_finite() && constant > 0.0) => {
                return Err(invalid_parameter(format!("match constant must be positive, got {constant}")))
            }
            _ => {}
        }
        if self.future_window == 0 {
            return Err(invalid_parameter("future window must be at least 1"));
        }
        if let Some(g) = self.round_granularity {
            if !(g.is_finite() && g > 0.0) {
                return Err(invalid_parameter("rounding granularity must be positive"));
            }
        }
        Ok(())
    }
}

/// Detector output plus the baseline frame index in force after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct HistTrace {
    pub changes: ChangePointSet,
    /// Detected window starts (frame indices), before rounding.
    pub indices: Vec<usize>,
    /// Baseline frame index after each declared change, aligned with
    /// `indices`.
    pub baselines: Vec<usize>,
    /// Match threshold, when the match method ran.
    pub threshold: Option<f64>,
}

/// `sum_b mean_t |h[t+1][b] - h[t][b]|`
pub fn successive_difference_scale(h: &HistogramSeries) -> f64 {
    let n = h.len();
    if n < 2 {
        return 0.0;
    }
    (0..h.bins())
        .map(|b| {
            (1..n)
                .map(|t| (h.frame(t)[b] - h.frame(t - 1)[b]).abs())
                .sum::<f64>()
                / (n - 1) as f64
        })
        .sum()
}

pub fn hist_detect(h: &HistogramSeries, cfg: &MultiConfig) -> Result<ChangePointSet> {
    hist_detect_traced(h, cfg).map(|t| t.changes)
}

pub fn hist_detect_traced(h: &HistogramSeries, cfg: &MultiConfig) -> Result<HistTrace> {
    cfg.validate()?;
    let n = h.len();
    let w = cfg.future_window;
    if n <= w + 1 {
        return Err(invalid_input(format!(
            "histogram series of length {n} too short for window {w}"
        )));
    }
    let threshold = match cfg.method {
        HistMethod::Match { constant } => Some(constant * successive_difference_scale(h)),
        HistMethod::Chi2 { .. } => None,
    };
    let differs = |baseline: &[f64], frame: &[f64]| -> Result<bool> {
        Ok(match cfg.method {
            HistMethod::Chi2 { alpha } => chi2_stat(frame, baseline)?.p_value < alpha,
            HistMethod::Match { .. } => {
                match_distance(baseline, frame)? > threshold.expect("match threshold")
            }
        })
    };

    let mut baseline = 0usize;
    let mut indices = Vec::new();
    let mut baselines = Vec::new();
    for t in 1..=n - w {
        let mut all = true;
        for j in t..t + w {
            if !differs(h.frame(baseline), h.frame(j))? {
                all = false;
                break;
            }
        }
        if all {
            indices.push(t);
            baseline = t;
            baselines.push(baseline);
        }
    }
    let points = indices
        .iter()
        .map(|&i| Ok(ChangePoint::at(h.time_of_index(i)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut changes = ChangePointSet::new(cfg.method.id(), points);
    if let Some(g) = cfg.round_granularity {
        changes = round_filter(&changes, g)?;
    }
    Ok(HistTrace {
        changes,
        indices,
        baselines,
        threshold,
    })
}

/// Per-bin prefix sums; the split statistic and variance are summed over
/// bins.
struct MultiScan {
    bins: Vec<UnivariateScan>,
    len: usize,
}

impl MultiScan {
    fn g(&self, lo: usize, hi: usize, c: usize) -> f64 {
        self.bins.iter().map(|b| b.g(lo, hi, c)).sum()
    }

    fn variance(&self, lo: usize, hi: usize) -> f64 {
        self.bins.iter().map(|b| b.variance(lo, hi)).sum()
    }
}

impl SplitModel for MultiScan {
    fn len(&self) -> usize {
        self.len
    }

    fn best_split(&self, lo: usize, hi: usize) -> (usize, f64, f64) {
        let mut best = (1, f64::NEG_INFINITY);
        for c in 1..hi - lo {
            let g = self.g(lo, hi, c);
            if g > best.1 {
                best = (c, g);
            }
        }
        (best.0, best.1, exp_tail(best.1, self.variance(lo, hi)))
    }
}

pub const MSE_MULTI_ID: &str = "mse-multi";

/// Recursive MSE splitting on histograms: each bin is median-filtered, the
/// split statistic is summed over bins, and the variance in the tail test is
/// the sum of per-bin sample variances.
pub fn mse_multi_detect(h: &HistogramSeries, cfg: &MseConfig) -> Result<ChangePointSet> {
    cfg.validate()?;
    let scan = MultiScan {
        bins: (0..h.bins())
            .map(|b| UnivariateScan::new(&median_filter_values(&h.bin_series(b), cfg.median_window)))
            .collect(),
        len: h.len(),
    };
    let points = binary_segmentation(&scan, cfg)
        .into_iter()
        .map(|(i, p)| Ok(ChangePoint::with_score(h.time_of_index(i)?, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChangePointSet::new(MSE_MULTI_ID, points))
}

/// Summed split statistic for a split after `c` frames of the whole series,
/// without filtering. Exposed for checking the split search.
pub fn mse_multi_split_stat(h: &HistogramSeries, c: usize) -> Result<f64> {
    let n = h.len();
    if c == 0 || c >= n {
        return Err(invalid_parameter(format!("split {c} must be in 1..{n}")));
    }
    let scan = MultiScan {
        bins: (0..h.bins()).map(|b| UnivariateScan::new(&h.bin_series(b))).collect(),
        len: n,
    };
    Ok(scan.g(0, n, c))
}
