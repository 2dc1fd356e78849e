//! Univariate change-point detectors over scores or binary labels.

pub mod filters;
pub mod forecast;
pub mod hmm;
pub mod mle;
pub mod mse;

use std::fmt;
use std::str::FromStr;

pub use filters::{round_filter, sign_change_filter};
pub use forecast::{forecast_detect, ForecastConfig, ForecastModel, PostFilter};
pub use hmm::{hmm_detect, hmm_fit, hmm_fit_many, viterbi, HmmConfig, HmmFit, HmmParams};
pub use mle::{mle_detect, MleConfig, MleResult};
pub use mse::{mse_detect, mse_split_stat, MseConfig, SplitStat};

use crate::error::{invalid_parameter, Error};

/// Whether a detector consumes raw scores or thresholded labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Scores,
    Labels,
}

impl InputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InputKind::Scores => "scores",
            InputKind::Labels => "labels",
        }
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "scores" => Ok(InputKind::Scores),
            "labels" => Ok(InputKind::Labels),
            other => Err(invalid_parameter(format!("unknown input kind `{other}`"))),
        }
    }
}

/// Stable detector identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DetectorId {
    Mse,
    ForecastAr1,
    ForecastMean,
    Mle,
    Hmm,
    Chi2,
    Match,
    MseMulti,
}

impl DetectorId {
    pub const ALL: [DetectorId; 8] = [
        DetectorId::Mse,
        DetectorId::ForecastAr1,
        DetectorId::ForecastMean,
        DetectorId::Mle,
        DetectorId::Hmm,
        DetectorId::Chi2,
        DetectorId::Match,
        DetectorId::MseMulti,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DetectorId::Mse => "mse",
            DetectorId::ForecastAr1 => "forecast-ar1",
            DetectorId::ForecastMean => "forecast-mean",
            DetectorId::Mle => "mle",
            DetectorId::Hmm => "hmm",
            DetectorId::Chi2 => "chi2",
            DetectorId::Match => "match",
            DetectorId::MseMulti => "mse-multi",
        }
    }

    /// Histogram-series detectors.
    pub fn is_multivariate(self) -> bool {
        matches!(self, DetectorId::Chi2 | DetectorId::Match | DetectorId::MseMulti)
    }
}

impl fmt::Display for DetectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        DetectorId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| invalid_parameter(format!("unknown detector `{s}`")))
    }
}
