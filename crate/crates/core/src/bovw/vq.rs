use super::{squared_distance, Codebook, DescriptorSet, Histogram};
use crate::error::{invalid_parameter, Error, Result};

/// How a descriptor is spread over codebook bins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VqMode {
    /// All weight on the nearest centroid.
    Hard,
    /// Exponentially decayed relative distance with decay `E`.
    Soft(f64),
}

impl VqMode {
    pub fn validate(self, codebook_len: usize) -> Result<()> {
        match self {
            VqMode::Hard => Ok(()),
            VqMode::Soft(e) => {
                if !(e.is_finite() && e > 0.0) {
                    return Err(invalid_parameter(format!("soft VQ decay E must be positive, got {e}")));
                }
                if codebook_len < 2 {
                    return Err(invalid_parameter("soft VQ needs at least two centroids"));
                }
                Ok(())
            }
        }
    }

    /// Adds one descriptor's unit contribution into `out`.
    pub(crate) fn accumulate(self, descriptor: &[f64], centroids: &[Vec<f64>], out: &mut [f64]) {
        match self {
            VqMode::Hard => out[hard_vq_row(descriptor, centroids)] += 1.0,
            VqMode::Soft(e) => {
                for (o, w) in out.iter_mut().zip(soft_vq_row(descriptor, centroids, e)) {
                    *o += w;
                }
            }
        }
    }
}

fn check_dim(d: &DescriptorSet, cb: &Codebook) -> Result<()> {
    if d.dim() != cb.dim() {
        return Err(Error::DimensionMismatch {
            expected: cb.dim(),
            found: d.dim(),
        });
    }
    Ok(())
}

/// Index of the Euclidean-nearest centroid; ties go to the lowest index.
pub fn hard_vq_row(descriptor: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(descriptor, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Count of descriptors whose nearest centroid is each bin.
pub fn hard_vq(d: &DescriptorSet, cb: &Codebook) -> Result<Histogram> {
    check_dim(d, cb)?;
    let mut h = Histogram::zeros(cb.len());
    for v in d.vectors() {
        VqMode::Hard.accumulate(v, cb.centroids(), h.bins_mut());
    }
    Ok(h)
}

/// Per-bin weights of one descriptor under soft quantization; sums to 1.
///
/// Relative distance puts the nearest centroid at 0 and the farthest at 1.
/// When every centroid is equidistant the relative distances are all 0 and
/// the weight is uniform.
pub fn soft_vq_row(descriptor: &[f64], centroids: &[Vec<f64>], decay: f64) -> Vec<f64> {
    let dist: Vec<f64> = centroids
        .iter()
        .map(|c| squared_distance(descriptor, c).sqrt())
        .collect();
    let (lo, hi) = dist
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    let span = hi - lo;
    let mut w: Vec<f64> = dist
        .iter()
        .map(|&d| {
            let rel = if span > 0.0 { (d - lo) / span } else { 0.0 };
            (-decay * rel).exp()
        })
        .collect();
    // The nearest centroid contributes exp(0) = 1, so the sum is >= 1.
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Soft-quantized histogram; each descriptor contributes total weight 1.
pub fn soft_vq(d: &DescriptorSet, cb: &Codebook, decay: f64) -> Result<Histogram> {
    let mode = VqMode::Soft(decay);
    mode.validate(cb.len())?;
    check_dim(d, cb)?;
    let mut h = Histogram::zeros(cb.len());
    for v in d.vectors() {
        mode.accumulate(v, cb.centroids(), h.bins_mut());
    }
    Ok(h)
}
