use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use scenecut::detect::{
    forecast_detect, hmm_detect, hmm_fit_many, mle_detect, mse_detect, DetectorId, ForecastConfig, ForecastModel,
    HmmConfig, InputKind, MleConfig, MseConfig, PostFilter,
};
use scenecut::io::{parse_histograms, parse_scores, write_predictions};
use scenecut::multi::{hist_detect, mse_multi_detect, HistMethod, HistogramSeries, MultiConfig};
use scenecut::{ChangePointSet, LabelSeries, ScoreSeries};

use crate::common::{emit, inputs_by_id, load, CommonArgs, Profile};
use crate::error::{CliError, CliResult};
use crate::settings::{Manifest, Settings};

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Detector id: mse, forecast-ar1, forecast-mean, mle, hmm, chi2,
    /// match, mse-multi.
    #[arg(long)]
    pub method: Option<String>,
    /// Whether mse/mle consume the scores or 0/1 labels.
    #[arg(long, value_parser = ["scores", "labels"])]
    pub input_kind: Option<String>,
}

enum Plan {
    Mse(MseConfig, f64),
    Forecast(ForecastConfig),
    Mle(MleConfig, f64),
    Hmm(HmmConfig),
    Hist(MultiConfig),
    MseMulti(MseConfig),
}

fn filters_to_string(f: &[PostFilter]) -> String {
    if f.is_empty() {
        return "none".into();
    }
    f.iter()
        .map(|f| match f {
            PostFilter::SignChange => "sign_change".to_string(),
            PostFilter::RoundTo(g) => format!("round:{g}"),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_filters(raw: &str) -> CliResult<Vec<PostFilter>> {
    if raw.trim() == "none" {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|p| {
            let p = p.trim();
            if p == "sign_change" {
                Ok(PostFilter::SignChange)
            } else if let Some(g) = p.strip_prefix("round:") {
                g.parse()
                    .map(PostFilter::RoundTo)
                    .map_err(|_| CliError::usage(format!("bad rounding granularity {g:?}")))
            } else {
                Err(CliError::usage(format!(
                    "unknown filter {p:?} (expected sign_change, round:<seconds> or none)"
                )))
            }
        })
        .collect()
}

fn opt_to_string(g: Option<f64>) -> String {
    g.map_or("none".into(), |g| g.to_string())
}

fn parse_round(raw: &str) -> CliResult<Option<f64>> {
    if raw == "none" {
        return Ok(None);
    }
    raw.parse()
        .map(Some)
        .map_err(|_| CliError::usage(format!("bad rounding granularity {raw:?}")))
}

fn mse_config(s: &Settings, m: &mut Manifest, profile: Profile, multi: bool) -> CliResult<MseConfig> {
    let d = MseConfig::default();
    let kind_default = match profile {
        Profile::Cnn => InputKind::Labels,
        Profile::Svm => InputKind::Scores,
    };
    let cfg = MseConfig {
        alpha: s.get_or("alpha", d.alpha)?,
        max_depth: s.get_or("max_depth", d.max_depth)?,
        min_segment: s.get_or("min_segment", d.min_segment)?,
        median_window: s.get_or("median_window", d.median_window)?,
        input_kind: if multi { InputKind::Scores } else { s.get_or("input_kind", kind_default)? },
    };
    m.push("alpha", cfg.alpha);
    m.push("max_depth", cfg.max_depth);
    m.push("min_segment", cfg.min_segment);
    m.push("median_window", cfg.median_window);
    if !multi {
        m.push("input_kind", cfg.input_kind.as_str());
    }
    Ok(cfg)
}

fn threshold(s: &Settings, m: &mut Manifest) -> CliResult<f64> {
    let t = s.get_or("threshold", 0.0)?;
    m.push("threshold", t);
    Ok(t)
}

fn plan(method: DetectorId, s: &Settings, m: &mut Manifest, profile: Profile) -> CliResult<Plan> {
    Ok(match method {
        DetectorId::Mse => {
            let cfg = mse_config(s, m, profile, false)?;
            Plan::Mse(cfg, threshold(s, m)?)
        }
        DetectorId::MseMulti => Plan::MseMulti(mse_config(s, m, profile, true)?),
        DetectorId::ForecastAr1 | DetectorId::ForecastMean => {
            let model = if method == DetectorId::ForecastAr1 { ForecastModel::Ar1 } else { ForecastModel::Mean };
            let d = match (profile, model) {
                (Profile::Cnn, _) => ForecastConfig::new(model),
                (Profile::Svm, ForecastModel::Ar1) => ForecastConfig {
                    filters: vec![],
                    ..ForecastConfig::new(model)
                },
                (Profile::Svm, ForecastModel::Mean) => ForecastConfig {
                    model,
                    future_window: 7,
                    baseline_count: 10,
                    filters: vec![PostFilter::RoundTo(1.0)],
                },
            };
            let filters = match s.get::<String>("filters")? {
                Some(raw) => parse_filters(&raw)?,
                None => d.filters.clone(),
            };
            let cfg = ForecastConfig {
                model,
                future_window: s.get_or("future_window", d.future_window)?,
                baseline_count: s.get_or("baseline_count", d.baseline_count)?,
                filters,
            };
            m.push("future_window", cfg.future_window);
            m.push("baseline_count", cfg.baseline_count);
            m.push("filters", filters_to_string(&cfg.filters));
            Plan::Forecast(cfg)
        }
        DetectorId::Mle => {
            let d = MleConfig::default();
            let cfg = MleConfig {
                accuracy: s.get_or("accuracy", d.accuracy)?,
                max_changes: s.get_or("max_changes", d.max_changes)?,
            };
            m.push("accuracy", cfg.accuracy);
            m.push("max_changes", cfg.max_changes);
            Plan::Mle(cfg, threshold(s, m)?)
        }
        DetectorId::Hmm => {
            let d = HmmConfig::default();
            let seed = s.get::<u64>("seed")?.ok_or_else(|| CliError::usage("hmm fitting needs --seed"))?;
            let cfg = HmmConfig {
                sg_window: s.get_or("sg_window", d.sg_window)?,
                sg_order: s.get_or("sg_order", d.sg_order)?,
                max_iter: s.get_or("max_iter", d.max_iter)?,
                tol: s.get_or("tol", d.tol)?,
                seed,
            };
            m.push("seed", cfg.seed);
            m.push("sg_window", cfg.sg_window);
            m.push("sg_order", cfg.sg_order);
            m.push("max_iter", cfg.max_iter);
            m.push("tol", cfg.tol);
            Plan::Hmm(cfg)
        }
        DetectorId::Chi2 => {
            let d = MultiConfig::chi2();
            let HistMethod::Chi2 { alpha } = d.method else { unreachable!() };
            let cfg = MultiConfig {
                method: HistMethod::Chi2 { alpha: s.get_or("alpha", alpha)? },
                future_window: s.get_or("future_window", d.future_window)?,
                round_granularity: match s.get::<String>("round")? {
                    Some(r) => parse_round(&r)?,
                    None => d.round_granularity,
                },
            };
            if let HistMethod::Chi2 { alpha } = cfg.method {
                m.push("alpha", alpha);
            }
            m.push("future_window", cfg.future_window);
            m.push("round", opt_to_string(cfg.round_granularity));
            Plan::Hist(cfg)
        }
        DetectorId::Match => {
            let d = MultiConfig::matching();
            let HistMethod::Match { constant } = d.method else { unreachable!() };
            let cfg = MultiConfig {
                method: HistMethod::Match { constant: s.get_or("constant", constant)? },
                future_window: s.get_or("future_window", d.future_window)?,
                round_granularity: match s.get::<String>("round")? {
                    Some(r) => parse_round(&r)?,
                    None => d.round_granularity,
                },
            };
            if let HistMethod::Match { constant } = cfg.method {
                m.push("constant", constant);
            }
            m.push("future_window", cfg.future_window);
            m.push("round", opt_to_string(cfg.round_granularity));
            Plan::Hist(cfg)
        }
    })
}

/// 0/1 files are taken as labels; anything else is thresholded.
fn as_labels(s: &ScoreSeries, threshold: f64) -> LabelSeries {
    if s.values().iter().all(|v| *v == 0.0 || *v == 1.0) {
        LabelSeries::new(
            s.values().iter().map(|v| *v as u8).collect(),
            s.sample_period(),
            s.origin(),
        )
        .expect("valid series stays valid")
    } else {
        LabelSeries::from_scores(s, threshold)
    }
}

fn with_path<T>(path: &std::path::Path, r: scenecut::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        scenecut::Error::InvalidParameter(m) => CliError::Usage(m),
        other => CliError::in_file(path, other),
    })
}

fn run_univariate(plan: &Plan, inputs: &[(String, PathBuf)]) -> CliResult<Vec<ChangePointSet>> {
    let series: Vec<ScoreSeries> = inputs
        .par_iter()
        .map(|(_, p)| load(p, parse_scores))
        .collect::<CliResult<_>>()?;
    let hmm_params = match plan {
        Plan::Hmm(cfg) => {
            let seqs: Vec<&[f64]> = series.iter().map(ScoreSeries::values).collect();
            let fit = hmm_fit_many(&seqs, cfg.seed, cfg.max_iter, cfg.tol)?;
            if fit.degenerate {
                eprintln!("warning: degenerate HMM fit (constant input or collapsed variance)");
            }
            let p = &fit.params;
            eprintln!(
                "hmm: {} iterations, mean {:?}, sigma {:?}, transition {:?}",
                fit.iterations(),
                p.mean,
                p.sigma,
                p.transition
            );
            Some(fit.params)
        }
        _ => None,
    };
    series
        .par_iter()
        .zip(inputs)
        .map(|(s, (_, path))| {
            let r = match plan {
                Plan::Mse(cfg, t) => match cfg.input_kind {
                    InputKind::Scores => mse_detect(s, cfg),
                    InputKind::Labels => mse_detect(&as_labels(s, *t).to_scores(), cfg),
                },
                Plan::Forecast(cfg) => forecast_detect(s, cfg),
                Plan::Mle(cfg, t) => mle_detect(&as_labels(s, *t), cfg).map(|r| r.changes),
                Plan::Hmm(cfg) => hmm_detect(s, hmm_params.as_ref().expect("fitted"), cfg.sg_window, cfg.sg_order),
                Plan::Hist(_) | Plan::MseMulti(_) => unreachable!("multivariate plan"),
            };
            with_path(path, r)
        })
        .collect()
}

fn run_multivariate(plan: &Plan, inputs: &[(String, PathBuf)]) -> CliResult<Vec<ChangePointSet>> {
    inputs
        .par_iter()
        .map(|(_, path)| {
            let h: HistogramSeries = load(path, parse_histograms)?;
            let r = match plan {
                Plan::Hist(cfg) => hist_detect(&h, cfg),
                Plan::MseMulti(cfg) => mse_multi_detect(&h, cfg),
                _ => unreachable!("univariate plan"),
            };
            with_path(path, r)
        })
        .collect()
}

pub fn run(args: &DetectArgs) -> CliResult<()> {
    let mut s = args.common.settings("detect")?;
    s.set_opt("method", args.method.as_deref());
    s.set_opt("input_kind", args.input_kind.as_deref());

    let method: DetectorId = s.require("method")?;
    let profile: Profile = s.get_or("profile", Profile::Cnn)?;
    let inputs = inputs_by_id(&s)?;

    let mut m = Manifest::new("detect");
    m.push("method", method);
    m.push("profile", profile);
    for (_, p) in &inputs {
        m.push("input", p.display());
    }
    let plan = plan(method, &s, &mut m, profile)?;
    if !matches!(plan, Plan::Hmm(_)) {
        // Accept but ignore a seed on deterministic detectors.
        let _ = s.get::<u64>("seed")?;
    }
    s.finish()?;

    let results = if method.is_multivariate() {
        run_multivariate(&plan, &inputs)?
    } else {
        run_univariate(&plan, &inputs)?
    };
    let text = write_predictions(inputs.iter().map(|(id, _)| id.as_str()).zip(&results));
    emit(args.common.output.as_deref(), &text, &m)
}
