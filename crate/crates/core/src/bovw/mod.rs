//! Bag-of-visual-words frame representations.
//!
//! Descriptors from frames of each scene state are clustered separately
//! into `K` visual words per state; the `2K` centroids form the codebook.
//! Frames are then quantized against the codebook, either hard (nearest
//! centroid) or soft (exponentially decayed relative distance), optionally
//! split over a spatial pyramid.

mod kmeans;
mod pyramid;
mod vq;

pub use kmeans::{kmeans_fit, KMeansFit};
pub use pyramid::{build_pyramid, level_weights, pyramid_match_kernel, PyramidDescriptor};
pub use vq::{hard_vq, hard_vq_row, soft_vq, soft_vq_row, VqMode};

use crate::error::{invalid_input, Error, Result};

/// The two scene states. The negative state owns the first half of the
/// codebook.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum State {
    Negative,
    Positive,
}

/// Descriptors extracted from one frame, with optional normalized positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet {
    dim: usize,
    vectors: Vec<Vec<f64>>,
    positions: Option<Vec<[f64; 2]>>,
}

impl DescriptorSet {
    /// Descriptors without positions. An empty set must state its dimension.
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid_input("descriptor dimension must be at least 1"));
        }
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid_input("descriptor values must be finite"));
            }
        }
        Ok(Self {
            dim,
            vectors,
            positions: None,
        })
    }

    /// Descriptors with positions in the unit square.
    pub fn with_positions(
        dim: usize,
        vectors: Vec<Vec<f64>>,
        positions: Vec<[f64; 2]>,
    ) -> Result<Self> {
        let mut set = Self::new(dim, vectors)?;
        if positions.len() != set.vectors.len() {
            return Err(invalid_input(format!(
                "{} positions for {} descriptors",
                positions.len(),
                set.vectors.len()
            )));
        }
        if positions
            .iter()
            .flatten()
            .any(|c| !(0.0..=1.0).contains(c))
        {
            return Err(invalid_input("positions must lie in [0, 1]^2"));
        }
        set.positions = Some(positions);
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// `2K` centroids: `K` from negative-state frames followed by `K` from
/// positive-state frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dim: usize,
    per_state: usize,
    centroids: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(per_state: usize, centroids: Vec<Vec<f64>>) -> Result<Self> {
        if per_state == 0 {
            return Err(invalid_input("codebook needs at least one centroid per state"));
        }
        if centroids.len() != 2 * per_state {
            return Err(invalid_input(format!(
                "codebook with K={per_state} needs {} centroids, got {}",
                2 * per_state,
                centroids.len()
            )));
        }
        let dim = centroids[0].len();
        if dim == 0 {
            return Err(invalid_input("centroid dimension must be at least 1"));
        }
        if let Some(bad) = centroids.iter().find(|c| c.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Ok(Self {
            dim,
            per_state,
            centroids,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `K`, the vocabulary size per state.
    pub fn per_state(&self) -> usize {
        self.per_state
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn state_of(&self, centroid: usize) -> State {
        if centroid < self.per_state {
            State::Negative
        } else {
            State::Positive
        }
    }

    pub fn state_centroids(&self, state: State) -> &[Vec<f64>] {
        match state {
            State::Negative => &self.centroids[..self.per_state],
            State::Positive => &self.centroids[self.per_state..],
        }
    }
}

/// Cluster each state's descriptors into `k` words and concatenate,
/// negative state first.
pub fn build_codebook(
    negative: &DescriptorSet,
    positive: &DescriptorSet,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<Codebook> {
    if negative.dim() != positive.dim() {
        return Err(Error::DimensionMismatch {
            expected: negative.dim(),
            found: positive.dim(),
        });
    }
    let neg = kmeans_fit(negative.vectors(), k, seed, max_iter)?;
    // Distinct stream for the positive state so identical inputs still get
    // independent initializations.
    let pos = kmeans_fit(positive.vectors(), k, seed.wrapping_add(1), max_iter)?;
    let mut centroids = neg.centroids;
    centroids.extend(pos.centroids);
    Codebook::new(k, centroids)
}

/// Non-negative histogram over codebook bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<f64>,
}

impl Histogram {
    pub fn new(bins: Vec<f64>) -> Result<Self> {
        if bins.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(invalid_input("histogram bins must be finite and non-negative"));
        }
        Ok(Self { bins })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bins: vec![0.0; len],
        }
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn into_bins(self) -> Vec<f64> {
        self.bins
    }

    pub(crate) fn bins_mut(&mut self) -> &mut [f64] {
        &mut self.bins
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
