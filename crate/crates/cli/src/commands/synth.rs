use std::path::Path;

use clap::Args;
use scenecut::io::{write_histograms, write_labels, write_scores, write_truth};
use scenecut::synth::{generate, paper_mimic_corpus, video_seed, CorpusConfig, StateModel, SynthSpec, SynthVideo, RNG_NAME};

use crate::common::{join_reals, parse_reals, write_atomic, write_manifest, CommonArgs};
use crate::error::{CliError, CliResult};
use crate::settings::{Manifest, Settings};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// `paper-mimic` generates the benchmark corpus; `none` uses the
    /// individual settings.
    #[arg(long)]
    pub preset: Option<String>,
    /// Samples per sequence.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated change indices.
    #[arg(long)]
    pub changes: Option<String>,
    /// Markov self-transition probability (instead of --changes).
    #[arg(long)]
    pub diag: Option<f64>,
    /// Number of sequences.
    #[arg(long)]
    pub videos: Option<usize>,
}

fn profiles_to_string(p: &Option<[Vec<f64>; 2]>) -> String {
    match p {
        None => "none".into(),
        Some([a, b]) => format!("{};{}", join_reals(a), join_reals(b)),
    }
}

fn parse_profiles(raw: &str) -> CliResult<Option<[Vec<f64>; 2]>> {
    if raw.trim() == "none" {
        return Ok(None);
    }
    let Some((a, b)) = raw.split_once(';') else {
        return Err(CliError::usage("profiles must look like a,b,...;c,d,... or none"));
    };
    Ok(Some([parse_reals(a, "profiles")?, parse_reals(b, "profiles")?]))
}

fn pair(raw: &str, key: &str) -> CliResult<[f64; 2]> {
    let v = parse_reals(raw, key)?;
    <[f64; 2]>::try_from(v).map_err(|_| CliError::usage(format!("{key} needs two values")))
}

fn corpus(s: &Settings, m: &mut Manifest, seed: u64) -> CliResult<Vec<SynthVideo>> {
    let d = CorpusConfig::default();
    let cfg = CorpusConfig {
        videos: s.get_or("videos", d.videos)?,
        n: s.get_or("n", d.n)?,
        max_changes: s.get_or("max_changes", d.max_changes)?,
        zero_fraction: s.get_or("zero_fraction", d.zero_fraction)?,
        min_gap: s.get_or("min_gap", d.min_gap)?,
        edge_gap: s.get_or("edge_gap", d.edge_gap)?,
        threshold_accuracy: s.get_or("accuracy", d.threshold_accuracy)?,
        hist_profiles: match s.get::<String>("profiles")? {
            Some(raw) => parse_profiles(&raw)?,
            None => d.hist_profiles.clone(),
        },
    };
    s.allow(&["profile"]);
    s.finish()?;
    m.push("videos", cfg.videos);
    m.push("n", cfg.n);
    m.push("max_changes", cfg.max_changes);
    m.push("zero_fraction", cfg.zero_fraction);
    m.push("min_gap", cfg.min_gap);
    m.push("edge_gap", cfg.edge_gap);
    m.push("accuracy", cfg.threshold_accuracy);
    m.push("profiles", profiles_to_string(&cfg.hist_profiles));
    Ok(paper_mimic_corpus(&cfg, seed)?)
}

fn custom(s: &Settings, m: &mut Manifest, seed: u64) -> CliResult<Vec<SynthVideo>> {
    let n: usize = s.get_or("n", 540)?;
    let changes: Option<String> = s.get("changes")?;
    let diag: Option<f64> = s.get("diag")?;
    let initial: u8 = s.get_or("initial", 0)?;
    let states = match (changes, diag) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either changes or diag, not both")),
        (_, Some(d)) => StateModel::Markov {
            transition: [[d, 1.0 - d], [1.0 - d, d]],
        },
        (c, None) => {
            let changes = c
                .as_deref()
                .unwrap_or("")
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::usage(format!("bad change index {t:?}: {e}"))))
                .collect::<CliResult<Vec<_>>>()?;
            StateModel::Explicit { initial, changes }
        }
    };
    let base = SynthSpec {
        n,
        sample_period: s.get_or("period", 1.0)?,
        origin: s.get_or("origin", 0.0)?,
        states,
        score_means: pair(&s.get_or("means", "-1,1".to_string())?, "means")?,
        score_sigma: pair(&s.get_or("sigma", "1,1".to_string())?, "sigma")?,
        label_accuracy: s.get_or("accuracy", 0.9)?,
        hist_profiles: parse_profiles(&s.get_or("profiles", "none".to_string())?)?,
        seed,
    };
    let videos: usize = s.get_or("videos", 1)?;
    s.allow(&["profile"]);
    s.finish()?;
    if videos == 0 {
        return Err(CliError::usage("videos must be at least 1"));
    }
    m.push("n", base.n);
    match &base.states {
        StateModel::Markov { transition } => m.push("diag", transition[0][0]),
        StateModel::Explicit { initial, changes } => {
            m.push("changes", changes.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
            m.push("initial", initial);
        }
    }
    m.push("period", base.sample_period);
    m.push("origin", base.origin);
    m.push("means", join_reals(&base.score_means));
    m.push("sigma", join_reals(&base.score_sigma));
    m.push("accuracy", base.label_accuracy);
    m.push("profiles", profiles_to_string(&base.hist_profiles));
    m.push("videos", videos);
    (0..videos)
        .map(|i| {
            let spec = SynthSpec {
                seed: if videos == 1 { seed } else { video_seed(seed, i) },
                ..base.clone()
            };
            Ok(generate(format!("video{i:03}"), &spec)?)
        })
        .collect()
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    let mut s = args.common.settings("synth")?;
    s.set_opt("preset", args.preset.as_deref());
    s.set_opt("n", args.n);
    s.set_opt("changes", args.changes.as_deref());
    s.set_opt("diag", args.diag);
    s.set_opt("videos", args.videos);

    let output = args
        .common
        .output
        .clone()
        .ok_or_else(|| CliError::usage("synth needs --output (a directory)"))?;
    let seed: u64 = s.get("seed")?.ok_or_else(|| CliError::usage("synth needs --seed"))?;
    let preset: String = s.get_or("preset", "none".to_string())?;
    let mut m = Manifest::new("synth");
    m.push("preset", &preset);
    m.push("seed", seed);
    let videos = match preset.as_str() {
        "paper-mimic" => corpus(&s, &mut m, seed)?,
        "none" => custom(&s, &mut m, seed)?,
        other => return Err(CliError::usage(format!("unknown preset {other:?} (paper-mimic or none)"))),
    };

    let stamp = format!("# generator={RNG_NAME} seed={seed}\n");
    let dir = |sub: &str, id: &str| output.join(sub).join(format!("{id}.csv"));
    for v in &videos {
        write_atomic(&dir("scores", &v.id), &(stamp.clone() + &write_scores(&v.scores)))?;
        write_atomic(&dir("labels", &v.id), &(stamp.clone() + &write_labels(&v.labels)))?;
        if let Some(h) = &v.histograms {
            write_atomic(&dir("hist", &v.id), &(stamp.clone() + &write_histograms(h)))?;
        }
    }
    let truth = write_truth(videos.iter().map(|v| (v.id.as_str(), &v.truth)));
    write_atomic(&output.join("truth.csv"), &(stamp + &truth))?;
    write_manifest(Path::new(&output), &m)
}
