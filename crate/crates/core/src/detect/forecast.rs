//! Future-window forecasting detectors.
//!
//! A baseline model is fit on the first observations. At every later index
//! the model predicts the next value once, and that prediction is compared
//! against each observation of the following window. If every absolute
//! difference exceeds the threshold, a change-point is declared at the
//! window start and the model is refit on the window.

use super::filters::{round_filter, sign_change_filter};
use crate::error::{invalid_input, invalid_parameter, Result};
use crate::series::{ChangePoint, ChangePointSet, ScoreSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastModel {
    /// One-lag autoregression with intercept.
    Ar1,
    /// Constant mean.
    Mean,
}

impl ForecastModel {
    pub fn id(self) -> &'static str {
        match self {
            ForecastModel::Ar1 => "forecast-ar1",
            ForecastModel::Mean => "forecast-mean",
        }
    }
}

/// Post-filters applied in order after detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PostFilter {
    SignChange,
    /// Round times to a multiple of this many seconds.
    RoundTo(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub model: ForecastModel,
    pub future_window: usize,
    pub baseline_count: usize,
    pub filters: Vec<PostFilter>,
}

impl ForecastConfig {
    /// Defaults for CNN-style scores: window 5, baseline 5, sign-change
    /// filter.
    pub fn new(model: ForecastModel) -> Self {
        Self {
            model,
            future_window: 5,
            baseline_count: 5,
            filters: vec![PostFilter::SignChange],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.future_window == 0 {
            return Err(invalid_parameter("future window must be at least 1"));
        }
        if self.baseline_count == 0 {
            return Err(invalid_parameter("baseline count must be at least 1"));
        }
        if self.model == ForecastModel::Ar1 && self.baseline_count < 2 {
            return Err(invalid_parameter("AR(1) baseline needs at least 2 observations"));
        }
        for f in &self.filters {
            if let PostFilter::RoundTo(g) = f {
                if !(g.is_finite() && *g > 0.0) {
                    return Err(invalid_parameter(format!("rounding granularity must be positive, got {g}")));
                }
            }
        }
        Ok(())
    }
}

/// Fitted one-step predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Fitted {
    Mean(f64),
    Ar1 { intercept: f64, slope: f64 },
}

impl Fitted {
    pub(crate) fn fit(model: ForecastModel, x: &[f64]) -> Self {
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        match model {
            ForecastModel::Mean => Fitted::Mean(mean),
            ForecastModel::Ar1 => {
                // OLS of x[t] on (1, x[t-1]).
                if x.len() < 2 {
                    return Fitted::Ar1 {
                        intercept: mean,
                        slope: 0.0,
                    };
                }
                let prev = &x[..x.len() - 1];
                let next = &x[1..];
                let m = prev.len() as f64;
                let mp = prev.iter().sum::<f64>() / m;
                let mn = next.iter().sum::<f64>() / m;
                let sxx: f64 = prev.iter().map(|p| (p - mp) * (p - mp)).sum();
                let sxy: f64 = prev.iter().zip(next).map(|(p, q)| (p - mp) * (q - mn)).sum();
                let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
                Fitted::Ar1 {
                    intercept: mn - slope * mp,
                    slope,
                }
            }
        }
    }

    pub(crate) fn predict(&self, previous: f64) -> f64 {
        match *self {
            Fitted::Mean(m) => m,
            Fitted::Ar1 { intercept, slope } => intercept + slope * previous,
        }
    }
}

pub(crate) fn sample_std(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    if x.len() < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Raw future-window detections as indices, before post-filters.
pub(crate) fn forecast_indices(x: &[f64], cfg: &ForecastConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let n = x.len();
    let w = cfg.future_window;
    let b = cfg.baseline_count;
    if n <= b + w {
        return Err(invalid_input(format!(
            "series of length {n} too short for baseline {b} and window {w}"
        )));
    }
    let threshold = sample_std(x);
    let mut model = Fitted::fit(cfg.model, &x[..b]);
    let mut found = Vec::new();
    for t in b..=n - w {
        let prediction = model.predict(x[t - 1]);
        let window = &x[t..t + w];
        if window.iter().all(|v| (prediction - v).abs() > threshold) {
            found.push(t);
            model = Fitted::fit(cfg.model, window);
        }
    }
    Ok(found)
}

pub fn forecast_detect(s: &ScoreSeries, cfg: &ForecastConfig) -> Result<ChangePointSet> {
    let idx = forecast_indices(s.values(), cfg)?;
    let points = idx
        .into_iter()
        .map(|i| Ok(ChangePoint::at(s.time_of_index(i)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ChangePointSet::new(cfg.model.id(), points);
    for f in &cfg.filters {
        out = match *f {
            PostFilter::SignChange => sign_change_filter(s, &out),
            PostFilter::RoundTo(g) => round_filter(&out, g)?,
        };
    }
    Ok(out)
}
