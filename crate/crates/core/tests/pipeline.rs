//! End-to-end runs through the public API: generate, serialize, parse,
//! detect, evaluate.

use scenecut::bovw::{build_codebook, hard_vq, DescriptorSet};
use scenecut::condense::{condense_codebook, condense_series};
use scenecut::detect::{hmm_fit, hmm_detect, mle_detect, mse_detect, MleConfig, MseConfig};
use scenecut::eval::{aggregate, evaluate, DEFAULT_WINDOW};
use scenecut::io::{parse_histograms, parse_labels, parse_scores, parse_truth, write_histograms, write_labels, write_scores, write_truth};
use scenecut::multi::{hist_detect, HistMethod, HistogramSeries, MultiConfig};
use scenecut::synth::{generate, SynthSpec};

fn video() -> scenecut::synth::SynthVideo {
    let mut spec = SynthSpec::explicit(300, vec![80, 190], 17);
    spec.score_sigma = [0.5, 0.5];
    spec.label_accuracy = 0.95;
    spec.hist_profiles = Some([vec![30.0, 20.0, 5.0, 1.0], vec![1.0, 5.0, 20.0, 30.0]]);
    generate("clip", &spec).unwrap()
}

#[test]
fn files_round_trip() {
    let v = video();
    assert_eq!(parse_scores(&write_scores(&v.scores)).unwrap(), v.scores);
    assert_eq!(parse_labels(&write_labels(&v.labels)).unwrap(), v.labels);
    let h = v.histograms.as_ref().unwrap();
    assert_eq!(&parse_histograms(&write_histograms(h)).unwrap(), h);
    let truth = parse_truth(&write_truth([("clip", &v.truth)])).unwrap();
    assert_eq!(truth["clip"].times(), v.truth.times());
}

#[test]
fn univariate_detectors_find_both_changes() {
    let v = video();
    let hmm = hmm_fit(&v.scores, 0, 200, 1e-6).unwrap();
    let sets = [
        mse_detect(&v.labels.to_scores(), &MseConfig::default()).unwrap(),
        hmm_detect(&v.scores, &hmm.params, 15, 1).unwrap(),
        mle_detect(&v.labels, &MleConfig { max_changes: 3, ..MleConfig::default() }).unwrap().changes,
    ];
    for s in &sets {
        let c = evaluate(s, &v.truth, DEFAULT_WINDOW).unwrap();
        assert_eq!(c.recall(), 1.0, "{}: {:?}", s.detector(), s.times());
    }
}

#[test]
fn histogram_detectors_find_both_changes() {
    let v = video();
    let h = v.histograms.unwrap();
    // The published match constant assumes far larger counts than these.
    let matching = MultiConfig {
        method: HistMethod::Match { constant: 2.0 },
        ..MultiConfig::matching()
    };
    for cfg in [MultiConfig::chi2(), matching] {
        let r = aggregate(&[evaluate(&hist_detect(&h, &cfg).unwrap(), &v.truth, DEFAULT_WINDOW).unwrap()], 10.0).unwrap();
        assert_eq!(r.recall, 1.0, "{cfg:?}");
    }
}

#[test]
fn bovw_chain() {
    let blob = |c: f64, n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![c + 0.01 * (i % 5) as f64, c - 0.01 * (i % 3) as f64]).collect()
    };
    let neg = DescriptorSet::new(2, blob(-1.0, 20)).unwrap();
    let pos = DescriptorSet::new(2, blob(1.0, 20)).unwrap();
    let cb = build_codebook(&neg, &pos, 3, 5, 100).unwrap();
    let frames: Vec<_> = [&neg, &pos, &neg]
        .iter()
        .map(|d| hard_vq(d, &cb).unwrap())
        .collect();
    let h = HistogramSeries::from_histograms(&frames, 1.0, 0.0).unwrap();
    let a = condense_codebook(&cb, f64::INFINITY, 2).unwrap();
    let c = condense_series(&h, &a).unwrap();
    assert_eq!(c.bins(), 2);
    for (t, f) in c.frames().enumerate() {
        assert_eq!(f.iter().sum::<f64>(), 20.0);
        let expect = if t == 1 { [0.0, 20.0] } else { [20.0, 0.0] };
        assert_eq!(f, expect);
    }
}
