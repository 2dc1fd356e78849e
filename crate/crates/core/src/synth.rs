//! Seeded two-state generator for scores, noisy labels and histograms.
//!
//! Each kind of draw uses its own ChaCha8 stream of the spec seed, so
//! changing the score noise level never reshuffles the labels.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::error::{invalid_parameter, Result};
use crate::multi::HistogramSeries;
use crate::series::{time_of_index, ChangePoint, ChangePointSet, LabelSeries, ScoreSeries};

/// Generator name recorded in the header of generated files.
pub const RNG_NAME: &str = "chacha8/rand_chacha-0.9";

/// Detector id used for ground-truth change-point sets.
pub const TRUTH_ID: &str = "truth";

const STATE_STREAM: u64 = 0;
const SCORE_STREAM: u64 = 1;
const LABEL_STREAM: u64 = 2;
const HIST_STREAM: u64 = 3;
const LAYOUT_STREAM: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// How the latent path is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum StateModel {
    /// Markov chain; the first state is drawn uniformly.
    Markov { transition: [[f64; 2]; 2] },
    /// Fixed switch indices, strictly increasing, inside `1..n`.
    Explicit { initial: u8, changes: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub sample_period: f64,
    pub origin: f64,
    pub states: StateModel,
    pub score_means: [f64; 2],
    pub score_sigma: [f64; 2],
    pub label_accuracy: f64,
    /// Per-state Poisson means for each histogram bin.
    pub hist_profiles: Option<[Vec<f64>; 2]>,
    pub seed: u64,
}

impl SynthSpec {
    /// `n` unit-period samples with switches at `changes`, scores
    /// `N(-1, 1)` / `N(1, 1)`, label accuracy 0.9, no histograms.
    pub fn explicit(n: usize, changes: Vec<usize>, seed: u64) -> Self {
        Self {
            n,
            sample_period: 1.0,
            origin: 0.0,
            states: StateModel::Explicit { initial: 0, changes },
            score_means: [-1.0, 1.0],
            score_sigma: [1.0, 1.0],
            label_accuracy: 0.9,
            hist_profiles: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid_parameter("length must be at least 1"));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(invalid_parameter("period must be positive"));
        }
        if !(self.origin.is_finite() && self.origin >= 0.0) {
            return Err(invalid_parameter("origin must be non-negative"));
        }
        match &self.states {
            StateModel::Markov { transition } => {
                for row in transition {
                    if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-9 {
                        return Err(invalid_parameter("transition rows must be probabilities summing to 1"));
                    }
                }
            }
            StateModel::Explicit { initial, changes } => {
                if *initial > 1 {
                    return Err(invalid_parameter("initial state must be 0 or 1"));
                }
                if changes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid_parameter("change indices must be strictly increasing"));
                }
                if changes.first().is_some_and(|&c| c == 0) || changes.last().is_some_and(|&c| c >= self.n) {
                    return Err(invalid_parameter(format!("change indices must lie in 1..{}", self.n)));
                }
            }
        }
        if self.score_means.iter().any(|m| !m.is_finite())
            || self.score_sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(invalid_parameter("score means must be finite and sigmas non-negative"));
        }
        if !(self.label_accuracy > 0.5 && self.label_accuracy <= 1.0) {
            return Err(invalid_parameter("label accuracy must be in (0.5, 1]"));
        }
        if let Some([a, b]) = &self.hist_profiles {
            if a.is_empty() || a.len() != b.len() {
                return Err(invalid_parameter("histogram profiles must be nonempty and equally long"));
            }
            if a.iter().chain(b).any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(invalid_parameter("histogram profiles must be non-negative"));
            }
        }
        Ok(())
    }

    fn time(&self, i: usize) -> Result<f64> {
        time_of_index(self.origin, self.sample_period, self.n, i)
    }
}

/// Latent path plus the true change-point times.
pub fn gen_states(spec: &SynthSpec) -> Result<(Vec<u8>, ChangePointSet)> {
    spec.validate()?;
    let mut states = Vec::with_capacity(spec.n);
    match &spec.states {
        StateModel::Markov { transition } => {
            let mut rng = stream(spec.seed, STATE_STREAM);
            let mut s: u8 = rng.random_range(0..2);
            states.push(s);
            for _ in 1..spec.n {
                if rng.random::<f64>() >= transition[s as usize][s as usize] {
                    s = 1 - s;
                }
                states.push(s);
            }
        }
        StateModel::Explicit { initial, changes } => {
            let mut s = *initial;
            let mut next = changes.iter().peekable();
            for i in 0..spec.n {
                if next.peek().is_some_and(|&&c| c == i) {
                    s = 1 - s;
                    next.next();
                }
                states.push(s);
            }
        }
    }
    let points = (1..spec.n)
        .filter(|&i| states[i] != states[i - 1])
        .map(|i| Ok(ChangePoint::at(spec.time(i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok((states, ChangePointSet::new(TRUTH_ID, points)))
}

pub fn gen_scores(states: &[u8], spec: &SynthSpec) -> Result<ScoreSeries> {
    spec.validate()?;
    let mut rng = stream(spec.seed, SCORE_STREAM);
    let values = states
        .iter()
        .map(|&s| {
            let z: f64 = rng.sample(StandardNormal);
            spec.score_means[s as usize] + spec.score_sigma[s as usize] * z
        })
        .collect();
    ScoreSeries::new(values, spec.sample_period, spec.origin)
}

/// Each label equals the state with probability `accuracy`, independently.
pub fn gen_labels(states: &[u8], spec: &SynthSpec) -> Result<LabelSeries> {
    spec.validate()?;
    let mut rng = stream(spec.seed, LABEL_STREAM);
    let labels = states
        .iter()
        .map(|&s| if rng.random::<f64>() < spec.label_accuracy { s } else { 1 - s })
        .collect();
    LabelSeries::new(labels, spec.sample_period, spec.origin)
}

/// Poisson counts around the profile of the current state. A zero mean
/// always yields zero.
pub fn gen_histograms(states: &[u8], spec: &SynthSpec) -> Result<HistogramSeries> {
    spec.validate()?;
    let Some(profiles) = &spec.hist_profiles else {
        return Err(invalid_parameter("spec has no histogram profiles"));
    };
    let bins = profiles[0].len();
    let dists: Vec<Vec<Option<Poisson<f64>>>> = profiles
        .iter()
        .map(|p| p.iter().map(|&m| if m > 0.0 { Poisson::new(m).ok() } else { None }).collect())
        .collect();
    let mut rng = stream(spec.seed, HIST_STREAM);
    let frames = states
        .iter()
        .map(|&s| {
            dists[s as usize]
                .iter()
                .map(|d| d.as_ref().map_or(0.0, |d| d.sample(&mut rng)))
                .collect()
        })
        .collect();
    HistogramSeries::new(frames, bins, spec.sample_period, spec.origin)
}

/// One generated sequence with everything derived from its states.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub id: String,
    pub states: Vec<u8>,
    pub truth: ChangePointSet,
    pub scores: ScoreSeries,
    pub labels: LabelSeries,
    pub histograms: Option<HistogramSeries>,
}

pub fn generate(id: impl Into<String>, spec: &SynthSpec) -> Result<SynthVideo> {
    let (states, truth) = gen_states(spec)?;
    Ok(SynthVideo {
        id: id.into(),
        scores: gen_scores(&states, spec)?,
        labels: gen_labels(&states, spec)?,
        histograms: spec.hist_profiles.as_ref().map(|_| gen_histograms(&states, spec)).transpose()?,
        truth,
        states,
    })
}

/// Settings of the benchmark corpus that imitates the reference footage:
/// nine-minute sequences at one sample per second with up to eleven
/// change-points, separated so that thresholding at zero is right 94% of
/// the time.
///
/// The number of change-points per sequence follows a geometric law
/// truncated to `0..=max_changes`, with its ratio chosen so that a
/// `zero_fraction` share of sequences has no change at all (271 of the 691
/// reference videos).
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub videos: usize,
    pub n: usize,
    pub max_changes: usize,
    pub zero_fraction: f64,
    pub min_gap: usize,
    pub edge_gap: usize,
    pub threshold_accuracy: f64,
    pub hist_profiles: Option<[Vec<f64>; 2]>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            videos: 100,
            n: 540,
            max_changes: 11,
            zero_fraction: 271.0 / 691.0,
            min_gap: 30,
            edge_gap: 15,
            threshold_accuracy: 0.94,
            hist_profiles: Some([
                vec![240.0, 180.0, 120.0, 80.0, 40.0, 20.0, 20.0, 20.0],
                vec![20.0, 20.0, 20.0, 40.0, 80.0, 120.0, 180.0, 240.0],
            ]),
        }
    }
}

impl CorpusConfig {
    /// Emission sigma giving `P(x > 0 | mean 1) = threshold_accuracy`.
    pub fn score_sigma(&self) -> f64 {
        let z = StdNormal::new(0.0, 1.0).expect("standard normal").inverse_cdf(self.threshold_accuracy);
        1.0 / z
    }

    /// Probabilities of 0..=max_changes change-points.
    pub fn count_distribution(&self) -> Vec<f64> {
        let m = self.max_changes;
        let uniform_zero = 1.0 / (m + 1) as f64;
        let p0 = |r: f64| 1.0 / (0..=m).map(|k| r.powi(k as i32)).sum::<f64>();
        // p0 falls from 1 to 1/(m+1) as r rises from 0 to 1.
        let r = if m == 0 || self.zero_fraction <= uniform_zero {
            1.0
        } else {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if p0(mid) > self.zero_fraction {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let w: Vec<f64> = (0..=m).map(|k| r.powi(k as i32)).collect();
        let total: f64 = w.iter().sum();
        w.into_iter().map(|v| v / total).collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.zero_fraction > 0.0 && self.zero_fraction < 1.0) {
            return Err(invalid_parameter("zero fraction must be in (0, 1)"));
        }
        if self.videos == 0 {
            return Err(invalid_parameter("corpus needs at least one video"));
        }
        if !(self.threshold_accuracy > 0.5 && self.threshold_accuracy < 1.0) {
            return Err(invalid_parameter("threshold accuracy must be in (0.5, 1)"));
        }
        let need = 2 * self.edge_gap + self.max_changes.saturating_sub(1) * self.min_gap;
        if self.edge_gap == 0 || self.min_gap == 0 || need > self.n {
            return Err(invalid_parameter(format!(
                "{} changes with gap {} and edge gap {} do not fit in {} samples",
                self.max_changes, self.min_gap, self.edge_gap, self.n
            )));
        }
        Ok(())
    }
}

/// Per-video seed derived from the corpus seed.
pub fn video_seed(corpus_seed: u64, index: usize) -> u64 {
    corpus_seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Uniform draw of `k` sorted change indices with pairwise gaps of at least
/// `min_gap` and at least `edge_gap` samples from either end.
fn draw_layout(rng: &mut ChaCha8Rng, cfg: &CorpusConfig, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    let slack = cfg.n - 2 * cfg.edge_gap - (k - 1) * cfg.min_gap;
    // Stars and bars: k sorted values in 0..=slack with repetition.
    let mut picks = sample(rng, slack + k, k).into_vec();
    picks.sort_unstable();
    picks
        .iter()
        .enumerate()
        .map(|(i, &z)| cfg.edge_gap + i * cfg.min_gap + (z - i))
        .collect()
}

pub fn paper_mimic_corpus(cfg: &CorpusConfig, seed: u64) -> Result<Vec<SynthVideo>> {
    cfg.validate()?;
    let sigma = cfg.score_sigma();
    let probs = cfg.count_distribution();
    (0..cfg.videos)
        .map(|i| {
            let vs = video_seed(seed, i);
            let mut rng = stream(vs, LAYOUT_STREAM);
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let k = probs
                .iter()
                .position(|p| {
                    acc += p;
                    u < acc
                })
                .unwrap_or(cfg.max_changes);
            let initial: u8 = rng.random_range(0..2);
            let changes = draw_layout(&mut rng, cfg, k);
            let spec = SynthSpec {
                n: cfg.n,
                sample_period: 1.0,
                origin: 0.0,
                states: StateModel::Explicit { initial, changes },
                score_means: [-1.0, 1.0],
                score_sigma: [sigma, sigma],
                label_accuracy: cfg.threshold_accuracy,
                hist_profiles: cfg.hist_profiles.clone(),
                seed: vs,
            };
            generate(format!("video{i:03}"), &spec)
        })
        .collect()
}
