//! Browser bindings for the demo page: generate a synthetic clip, run a
//! detector on it, score the result, and show soft quantization weights.

use scenecut::bovw::soft_vq_row;
use scenecut::detect::{
    forecast_detect, hmm_detect, hmm_fit, mle_detect, mse_detect, DetectorId, ForecastConfig, ForecastModel,
    HmmConfig, MleConfig, MseConfig,
};
use scenecut::eval::evaluate;
use scenecut::synth::{generate, SynthSpec, SynthVideo};
use scenecut::ChangePointSet;
use wasm_bindgen::prelude::*;

/// A generated clip: noisy scores, thresholded labels and true changes.
#[wasm_bindgen]
pub struct Clip {
    video: SynthVideo,
}

fn parse_changes(raw: &str) -> Result<Vec<usize>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("bad change index {s:?}")))
        .collect()
}

impl Clip {
    pub fn build(seed: u32, n: usize, changes: &str, sigma: f64, accuracy: f64) -> Result<Clip, String> {
        let mut spec = SynthSpec::explicit(n, parse_changes(changes)?, u64::from(seed));
        spec.score_sigma = [sigma, sigma];
        spec.label_accuracy = accuracy;
        let video = generate("clip", &spec).map_err(|e| e.to_string())?;
        Ok(Clip { video })
    }

    pub fn run(&self, method: &str) -> Result<ChangePointSet, String> {
        let id: DetectorId = method.parse().map_err(|e: scenecut::Error| e.to_string())?;
        let v = &self.video;
        let out = match id {
            DetectorId::Mse => mse_detect(&v.labels.to_scores(), &MseConfig::default()),
            DetectorId::ForecastAr1 => forecast_detect(&v.scores, &ForecastConfig::new(ForecastModel::Ar1)),
            DetectorId::ForecastMean => forecast_detect(&v.scores, &ForecastConfig::new(ForecastModel::Mean)),
            DetectorId::Mle => mle_detect(&v.labels, &MleConfig::default()).map(|r| r.changes),
            DetectorId::Hmm => {
                let cfg = HmmConfig::default();
                hmm_fit(&v.scores, cfg.seed, cfg.max_iter, cfg.tol)
                    .and_then(|fit| hmm_detect(&v.scores, &fit.params, cfg.sg_window, cfg.sg_order))
            }
            other => return Err(format!("{other} works on histograms, not on this clip")),
        };
        out.map_err(|e| e.to_string())
    }
}

#[wasm_bindgen]
impl Clip {
    /// `changes` is a comma-separated list of switch indices.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, n: usize, changes: &str, sigma: f64, accuracy: f64) -> Result<Clip, JsError> {
        Clip::build(seed, n, changes, sigma, accuracy).map_err(|e| JsError::new(&e))
    }

    pub fn scores(&self) -> Vec<f64> {
        self.video.scores.values().to_vec()
    }

    pub fn labels(&self) -> Vec<u8> {
        self.video.labels.labels().to_vec()
    }

    pub fn truth(&self) -> Vec<f64> {
        self.video.truth.times()
    }

    /// Change-point times found by `method` (mse, hmm, forecast-ar1,
    /// forecast-mean, mle).
    pub fn detect(&self, method: &str) -> Result<Vec<f64>, JsError> {
        self.run(method).map(|s| s.times()).map_err(|e| JsError::new(&e))
    }

    /// `[recall, precision]` of `predicted` against the true changes.
    pub fn score(&self, predicted: Vec<f64>, window: f64) -> Result<Vec<f64>, JsError> {
        let p = ChangePointSet::from_times("demo", &predicted);
        let c = evaluate(&p, &self.video.truth, window).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(vec![c.recall(), c.precision()])
    }
}

/// Soft assignment weights of one descriptor over centroids given as a flat
/// row-major array of `dim`-long rows.
pub fn soft_weights_of(descriptor: &[f64], centroids: &[f64], dim: usize, decay: f64) -> Result<Vec<f64>, String> {
    if dim == 0 || descriptor.len() != dim || !centroids.len().is_multiple_of(dim) || centroids.len() < 2 * dim {
        return Err("need a dim-long descriptor and at least two dim-long centroids".into());
    }
    if !(decay.is_finite() && decay > 0.0) {
        return Err(format!("decay must be positive, got {decay}"));
    }
    let rows: Vec<Vec<f64>> = centroids.chunks(dim).map(<[f64]>::to_vec).collect();
    Ok(soft_vq_row(descriptor, &rows, decay))
}

#[wasm_bindgen]
pub fn soft_weights(descriptor: Vec<f64>, centroids: Vec<f64>, dim: usize, decay: f64) -> Result<Vec<f64>, JsError> {
    soft_weights_of(&descriptor, &centroids, dim, decay).map_err(|e| JsError::new(&e))
}
