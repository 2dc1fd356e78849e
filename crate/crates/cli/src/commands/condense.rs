use std::path::Path;

use clap::Args;
use rayon::prelude::*;
use scenecut::condense::{agglomerate, condense_codebook, condense_series, cut_by_inconsistency, BinAssignment};
use scenecut::io::{parse_assignment, parse_codebook, parse_histograms, write_assignment, write_histograms};

use crate::common::{inputs_by_id, load, per_input_outputs, write_atomic, write_manifest, CommonArgs};
use crate::error::{CliError, CliResult};
use crate::settings::Manifest;

#[derive(Debug, Args)]
pub struct CondenseArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Codebook whose centroids are clustered.
    #[arg(long)]
    pub codebook: Option<String>,
    /// Inconsistency cutoff; `inf` merges everything.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Levels of the subtree used for the inconsistency statistics.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Cluster each state's centroids separately (`true`) or all together.
    #[arg(long)]
    pub per_state: Option<bool>,
    /// Use an existing assignment file instead of clustering.
    #[arg(long)]
    pub assignment: Option<String>,
    /// Also write the computed assignment here.
    #[arg(long)]
    pub assignment_output: Option<String>,
}

pub const DEFAULT_DEPTH: usize = 2;

pub fn run(args: &CondenseArgs) -> CliResult<()> {
    let mut s = args.common.settings("condense")?;
    s.set_opt("codebook", args.codebook.as_deref());
    s.set_opt("cutoff", args.cutoff);
    s.set_opt("depth", args.depth);
    s.set_opt("per_state", args.per_state);
    s.set_opt("assignment", args.assignment.as_deref());
    s.set_opt("assignment_output", args.assignment_output.as_deref());

    let output = args
        .common
        .output
        .clone()
        .ok_or_else(|| CliError::usage("condense needs --output"))?;
    let inputs = inputs_by_id(&s)?;
    let mut m = Manifest::new("condense");
    for (_, p) in &inputs {
        m.push("input", p.display());
    }

    let assignment: BinAssignment = if let Some(path) = s.get::<String>("assignment")? {
        m.push("assignment", &path);
        s.allow(&["seed", "profile"]);
        s.finish()?;
        load(Path::new(&path), parse_assignment)?
    } else {
        let cb_path: String = s.require("codebook")?;
        let cutoff: f64 = s.require("cutoff")?;
        let depth: usize = s.get_or("depth", DEFAULT_DEPTH)?;
        let per_state: bool = s.get_or("per_state", true)?;
        let out: Option<String> = s.get("assignment_output")?;
        s.allow(&["seed", "profile"]);
        s.finish()?;
        m.push("codebook", &cb_path);
        m.push("cutoff", cutoff);
        m.push("depth", depth);
        m.push("per_state", per_state);
        let cb = load(Path::new(&cb_path), parse_codebook)?;
        let a = if per_state {
            condense_codebook(&cb, cutoff, depth)?
        } else {
            cut_by_inconsistency(&agglomerate(cb.centroids())?, cutoff, depth)?
        };
        if let Some(p) = out {
            m.push("assignment_output", &p);
            write_atomic(Path::new(&p), &write_assignment(&a))?;
        }
        a
    };

    let series = inputs
        .par_iter()
        .map(|(_, p)| {
            let h = load(p, parse_histograms)?;
            condense_series(&h, &assignment).map_err(|e| CliError::in_file(p, e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let ids: Vec<String> = inputs.iter().map(|(id, _)| id.clone()).collect();
    for (t, h) in per_input_outputs(&output, &ids).iter().zip(&series) {
        write_atomic(t, &write_histograms(h))?;
    }
    write_manifest(&output, &m)
}
