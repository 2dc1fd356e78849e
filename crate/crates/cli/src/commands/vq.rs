use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use scenecut::bovw::{build_codebook, build_pyramid, Codebook, DescriptorSet, VqMode};
use scenecut::io::{parse_codebook, parse_descriptors, write_codebook, write_histograms, DescriptorFrame};
use scenecut::multi::HistogramSeries;

use crate::common::{inputs_by_id, load, per_input_outputs, write_atomic, write_manifest, CommonArgs};
use crate::error::{CliError, CliResult};
use crate::settings::{Manifest, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Hard,
    Soft,
}

#[derive(Debug, Args)]
pub struct VqArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Codebook file used for quantization.
    #[arg(long)]
    pub codebook: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Soft assignment decay.
    #[arg(long = "E")]
    pub decay: Option<f64>,
    /// Spatial pyramid depth (0 gives plain histograms).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Build a codebook from `--negative` and `--positive` descriptor files
    /// instead of quantizing.
    #[arg(long)]
    pub build_codebook: bool,
    #[arg(long)]
    pub negative: Option<String>,
    #[arg(long)]
    pub positive: Option<String>,
    /// Centroids per state when building a codebook.
    #[arg(long)]
    pub k: Option<usize>,
}

pub const DEFAULT_DECAY: f64 = 35.0;

fn pooled(path: &Path) -> CliResult<DescriptorSet> {
    let frames = load(path, parse_descriptors)?;
    let dim = frames
        .first()
        .map(|f| f.dim)
        .ok_or_else(|| CliError::data(format!("{}: no frames", path.display())))?;
    let mut vectors = Vec::new();
    for f in frames {
        if f.dim != dim {
            return Err(CliError::data(format!("{}: frames disagree on dim", path.display())));
        }
        vectors.extend(f.vectors);
    }
    DescriptorSet::new(dim, vectors).map_err(|e| CliError::in_file(path, e))
}

fn build(s: &Settings, output: &Path) -> CliResult<()> {
    let neg: String = s.require("negative")?;
    let pos: String = s.require("positive")?;
    let k: usize = s.require("k")?;
    let seed: u64 = s
        .get("seed")?
        .ok_or_else(|| CliError::usage("building a codebook needs --seed"))?;
    let max_iter: usize = s.get_or("max_iter", 100)?;
    s.allow(&["profile"]);
    s.finish()?;
    let mut m = Manifest::new("vq");
    m.push("build_codebook", true);
    m.push("negative", &neg);
    m.push("positive", &pos);
    m.push("k", k);
    m.push("seed", seed);
    m.push("max_iter", max_iter);
    let cb = build_codebook(&pooled(Path::new(&neg))?, &pooled(Path::new(&pos))?, k, seed, max_iter)?;
    write_atomic(output, &write_codebook(&cb))?;
    write_manifest(output, &m)
}

fn quantize(frames: Vec<DescriptorFrame>, cb: &Codebook, levels: usize, mode: VqMode, period: f64, origin: f64, path: &Path) -> CliResult<HistogramSeries> {
    let mut frames = frames;
    frames.sort_by_key(|f| f.frame);
    if frames.is_empty() {
        return Err(CliError::data(format!("{}: no frames", path.display())));
    }
    for (i, f) in frames.iter().enumerate() {
        if f.frame != i {
            return Err(CliError::data(format!("{}: frame indices must run 0..{} without gaps", path.display(), frames.len())));
        }
    }
    let rows = frames
        .iter()
        .map(|f| {
            let d = f.descriptors().map_err(|e| CliError::in_file(path, e))?;
            let p = build_pyramid(&d, cb, levels, mode).map_err(|e| CliError::in_file(path, e))?;
            Ok(p.flat().to_vec())
        })
        .collect::<CliResult<Vec<_>>>()?;
    let bins = rows[0].len();
    HistogramSeries::new(rows, bins, period, origin).map_err(|e| CliError::in_file(path, e))
}

pub fn run(args: &VqArgs) -> CliResult<()> {
    let mut s = args.common.settings("vq")?;
    s.set_opt("codebook", args.codebook.as_deref());
    s.set_opt("mode", args.mode.map(|m| if m == Mode::Hard { "hard" } else { "soft" }));
    s.set_opt("E", args.decay);
    s.set_opt("levels", args.levels);
    if args.build_codebook {
        s.set("build_codebook", true);
    }
    s.set_opt("negative", args.negative.as_deref());
    s.set_opt("positive", args.positive.as_deref());
    s.set_opt("k", args.k);

    let output = args
        .common
        .output
        .clone()
        .ok_or_else(|| CliError::usage("vq needs --output"))?;
    if s.get_or("build_codebook", false)? {
        return build(&s, &output);
    }

    let inputs = inputs_by_id(&s)?;
    let cb_path: String = s.require("codebook")?;
    let mode_name: String = s.get_or("mode", "hard".to_string())?;
    let mode = match mode_name.as_str() {
        "hard" => VqMode::Hard,
        "soft" => VqMode::Soft(s.get_or("E", DEFAULT_DECAY)?),
        other => return Err(CliError::usage(format!("unknown mode {other:?} (hard or soft)"))),
    };
    let levels: usize = s.get_or("levels", 0)?;
    let period: f64 = s.get_or("period", 1.0)?;
    let origin: f64 = s.get_or("origin", 0.0)?;
    s.allow(&["seed", "profile"]);
    s.finish()?;

    let mut m = Manifest::new("vq");
    for (_, p) in &inputs {
        m.push("input", p.display());
    }
    m.push("codebook", &cb_path);
    m.push("mode", &mode_name);
    if let VqMode::Soft(e) = mode {
        m.push("E", e);
    }
    m.push("levels", levels);
    m.push("period", period);
    m.push("origin", origin);

    let cb = load(Path::new(&cb_path), parse_codebook)?;
    mode.validate(cb.len())?;
    let series = inputs
        .par_iter()
        .map(|(_, p)| quantize(load(p, parse_descriptors)?, &cb, levels, mode, period, origin, p))
        .collect::<CliResult<Vec<_>>>()?;
    let ids: Vec<String> = inputs.iter().map(|(id, _)| id.clone()).collect();
    let targets: Vec<PathBuf> = per_input_outputs(&output, &ids);
    for (t, h) in targets.iter().zip(&series) {
        write_atomic(t, &write_histograms(h))?;
    }
    write_manifest(&output, &m)
}
