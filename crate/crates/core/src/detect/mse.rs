//! Two-constant least-squares splitting with an exponential tail test.
//!
//! For a split after `c` samples the squared error around the two segment
//! means is `SS_total - G_c`, where `G_c = c*m1^2 + (n-c)*m2^2` with the
//! segment means taken after centering on the interval mean. Minimizing the
//! error is therefore maximizing `G_c`, and under the no-change hypothesis
//! `G_c` is treated as Gamma(1, 2*sigma^2), giving the p-value
//! `exp(-G_c / (2*sigma^2))`.

use super::InputKind;
use crate::error::{invalid_parameter, Error, Result};
use crate::series::{median_filter_values, ChangePoint, ChangePointSet, ScoreSeries};

pub const MIN_TEST_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseConfig {
    /// Family-wise significance level before the per-interval Bonferroni
    /// division.
    pub alpha: f64,
    /// Recursion levels below the top-level split. With depth `d` at most
    /// `2^(d+1) - 1` change-points are reported.
    pub max_depth: usize,
    /// Intervals shorter than this are not tested.
    pub min_segment: usize,
    pub median_window: usize,
    pub input_kind: InputKind,
}

impl Default for MseConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            max_depth: 3,
            min_segment: MIN_TEST_LEN,
            median_window: 30,
            input_kind: InputKind::Labels,
        }
    }
}

impl MseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid_parameter(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.min_segment < 2 {
            return Err(invalid_parameter("min_segment must be at least 2"));
        }
        if self.median_window == 0 {
            return Err(invalid_parameter("median window must be at least 1"));
        }
        Ok(())
    }
}

/// Split statistic and its p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitStat {
    pub g: f64,
    pub p_value: f64,
}

/// `G_c` and its p-value for a split after the first `c` samples.
pub fn mse_split_stat(s: &ScoreSeries, c: usize) -> Result<SplitStat> {
    let x = s.values();
    let n = x.len();
    if n < MIN_TEST_LEN {
        return Err(Error::SegmentTooShort {
            needed: MIN_TEST_LEN,
            got: n,
        });
    }
    if c == 0 || c >= n {
        return Err(invalid_parameter(format!("split {c} must be in 1..{n}")));
    }
    let scan = UnivariateScan::new(x);
    let g = scan.g(0, n, c);
    Ok(SplitStat {
        g,
        p_value: exp_tail(g, scan.variance(0, n)),
    })
}

/// `exp(-g / (2 var))`, with a zero-variance interval treated as carrying no
/// evidence.
pub(crate) fn exp_tail(g: f64, var: f64) -> f64 {
    if var > 0.0 {
        (-g / (2.0 * var)).exp()
    } else {
        1.0
    }
}

/// Interval split search used by the recursive segmentation.
pub(crate) trait SplitModel {
    fn len(&self) -> usize;
    /// Best split `c` (left length) of `[lo, hi)` maximizing the statistic,
    /// with its value and p-value. Ties go to the smallest `c`.
    fn best_split(&self, lo: usize, hi: usize) -> (usize, f64, f64);
}

/// Prefix sums over a univariate series.
pub(crate) struct UnivariateScan {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl UnivariateScan {
    pub(crate) fn new(x: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(x.len() + 1);
        let mut sum_sq = Vec::with_capacity(x.len() + 1);
        sum.push(0.0);
        sum_sq.push(0.0);
        for &v in x {
            sum.push(sum.last().unwrap() + v);
            sum_sq.push(sum_sq.last().unwrap() + v * v);
        }
        Self { sum, sum_sq }
    }

    /// `G_c` on `[lo, hi)` for a left segment of length `c`.
    pub(crate) fn g(&self, lo: usize, hi: usize, c: usize) -> f64 {
        let n = (hi - lo) as f64;
        let total = self.sum[hi] - self.sum[lo];
        let mean = total / n;
        let left = self.sum[lo + c] - self.sum[lo];
        let (nl, nr) = (c as f64, n - c as f64);
        let m1 = left / nl - mean;
        let m2 = (total - left) / nr - mean;
        nl * m1 * m1 + nr * m2 * m2
    }

    /// Sample variance (n - 1 denominator) of `[lo, hi)`.
    pub(crate) fn variance(&self, lo: usize, hi: usize) -> f64 {
        let n = (hi - lo) as f64;
        let s = self.sum[hi] - self.sum[lo];
        let ss = self.sum_sq[hi] - self.sum_sq[lo];
        ((ss - s * s / n) / (n - 1.0)).max(0.0)
    }
}

impl SplitModel for UnivariateScan {
    fn len(&self) -> usize {
        self.sum.len() - 1
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

/// Recursive binary segmentation with a Bonferroni-corrected level
/// `alpha / interval_length`. Returns accepted split indices (first index
/// of the right segment) with their p-values, sorted.
pub(crate) fn binary_segmentation<M: SplitModel>(model: &M, cfg: &MseConfig) -> Vec<(usize, f64)> {
    let min_len = cfg.min_segment.max(MIN_TEST_LEN);
    let mut found = Vec::new();
    let mut stack = vec![(0, model.len(), 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let len = hi - lo;
        if len < min_len {
            continue;
        }
        let (c, _, p) = model.best_split(lo, hi);
        if p < cfg.alpha / len as f64 {
            found.push((lo + c, p));
            if depth < cfg.max_depth {
                stack.push((lo + c, hi, depth + 1));
                stack.push((lo, lo + c, depth + 1));
            }
        }
    }
    found.sort_by_key(|&(i, _)| i);
    found
}

pub const MSE_ID: &str = "mse";

/// Median-filter the series, then segment it recursively.
pub fn mse_detect(s: &ScoreSeries, cfg: &MseConfig) -> Result<ChangePointSet> {
    cfg.validate()?;
    let filtered = median_filter_values(s.values(), cfg.median_window);
    let scan = UnivariateScan::new(&filtered);
    let points = binary_segmentation(&scan, cfg)
        .into_iter()
        .map(|(i, p)| Ok(ChangePoint::with_score(s.time_of_index(i)?, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChangePointSet::new(MSE_ID, points))
}
