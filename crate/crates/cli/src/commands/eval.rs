use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use scenecut::eval::{aggregate, evaluate, EvalReport, VideoCounts, DEFAULT_WINDOW};
use scenecut::io::{parse_predictions, parse_truth, Predictions};
use scenecut::ChangePointSet;

use crate::common::{emit, load, CommonArgs};
use crate::error::{CliError, CliResult};
use crate::settings::Manifest;

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Ground-truth file of `video_id,time_seconds` lines.
    #[arg(long)]
    pub truth: Option<String>,
    /// Matching tolerance in seconds.
    #[arg(long)]
    pub window: Option<f64>,
    /// Also report each video.
    #[arg(long)]
    pub per_video: bool,
    /// Only evaluate this detector id.
    #[arg(long)]
    pub detector: Option<String>,
}

pub const REPORT_HEADER: &str =
    "detector,video,true_total,predicted_total,true_matched,predicted_matched,recall,precision,window";

/// Video column value of the aggregate row.
pub const ALL_VIDEOS: &str = "*";

fn row(out: &mut String, detector: &str, video: &str, r: &EvalReport) {
    let _ = writeln!(
        out,
        "{detector},{video},{},{},{},{},{},{},{}",
        r.true_total, r.predicted_total, r.true_matched, r.predicted_matched, r.recall, r.precision, r.window
    );
}

fn merge(into: &mut Predictions, more: Predictions) {
    for (det, videos) in more {
        let slot = into.entry(det.clone()).or_default();
        for (v, set) in videos {
            let merged = match slot.remove(&v) {
                Some(prev) => {
                    let mut pts = prev.points().to_vec();
                    pts.extend_from_slice(set.points());
                    ChangePointSet::new(det.clone(), pts)
                }
                None => set,
            };
            slot.insert(v, merged);
        }
    }
}

pub fn run(args: &EvalArgs) -> CliResult<()> {
    let mut s = args.common.settings("eval")?;
    s.set_opt("truth", args.truth.as_deref());
    s.set_opt("window", args.window);
    if args.per_video {
        s.set("per_video", true);
    }
    s.set_opt("detector", args.detector.as_deref());

    let inputs = s.list("input");
    if inputs.is_empty() {
        return Err(CliError::usage("no --input predictions given"));
    }
    let truth_path: String = s.require("truth")?;
    let window: f64 = s.get_or("window", DEFAULT_WINDOW)?;
    if !(window.is_finite() && window >= 0.0) {
        return Err(CliError::usage(format!("window must be non-negative, got {window}")));
    }
    let per_video: bool = s.get_or("per_video", false)?;
    let only: Option<String> = s.get("detector")?;
    s.finish()?;

    let mut m = Manifest::new("eval");
    for p in &inputs {
        m.push("input", p);
    }
    m.push("truth", &truth_path);
    m.push("window", window);
    m.push("per_video", per_video);
    if let Some(d) = &only {
        m.push("detector", d);
    }

    let truth = load(&PathBuf::from(&truth_path), parse_truth)?;
    let mut predictions = Predictions::new();
    for p in &inputs {
        merge(&mut predictions, load(&PathBuf::from(p), parse_predictions)?);
    }
    let detectors: Vec<String> = match &only {
        Some(d) => vec![d.clone()],
        None if predictions.is_empty() => vec!["-".to_string()],
        None => predictions.keys().cloned().collect(),
    };

    let empty = BTreeMap::new();
    let mut out = format!("{REPORT_HEADER}\n");
    for det in &detectors {
        let pred = predictions.get(det).unwrap_or(&empty);
        let videos: BTreeSet<&String> = truth.keys().chain(pred.keys()).collect();
        let mut counts: Vec<(String, VideoCounts)> = Vec::new();
        for v in videos {
            let none = ChangePointSet::empty(det.as_str());
            let p = pred.get(v).unwrap_or(&none);
            let t = truth.get(v).unwrap_or(&none);
            counts.push((v.clone(), evaluate(p, t, window)?));
        }
        if counts.is_empty() {
            counts.push((String::new(), VideoCounts::default()));
        }
        let all: Vec<VideoCounts> = counts.iter().map(|(_, c)| *c).collect();
        row(&mut out, det, ALL_VIDEOS, &aggregate(&all, window)?);
        if per_video {
            for (v, c) in counts.iter().filter(|(v, _)| !v.is_empty()) {
                row(&mut out, det, v, &aggregate(&[*c], window)?);
            }
        }
    }
    if args.common.output.is_some() {
        print!("{out}");
    }
    emit(args.common.output.as_deref(), &out, &m)
}
