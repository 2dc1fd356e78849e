use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use crate::error::{CliError, CliResult};
use crate::settings::{Manifest, Settings};

/// Parameter set keyed to the score source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Cnn,
    Svm,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Cnn => "cnn",
            Profile::Svm => "svm",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cnn" => Ok(Profile::Cnn),
            "svm" => Ok(Profile::Svm),
            _ => Err(format!("unknown profile {s:?} (expected cnn or svm)")),
        }
    }
}

/// Flags every command accepts.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input files; repeat the flag or list several after it.
    #[arg(long, num_args = 1..)]
    pub input: Vec<String>,
    /// Output file (or directory where the command writes several files).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Settings file of `key = value` lines; a run manifest works too.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for randomized steps.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Published parameter set to start from.
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Override any setting, e.g. `--set alpha=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl CommonArgs {
    /// Config file first, then flags on top.
    pub fn settings(&self, command: &str) -> CliResult<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        s.expect_command(command)?;
        s.set_list("input", &self.input);
        s.set_opt("seed", self.seed);
        s.set_opt("profile", self.profile);
        s.apply_overrides(&self.set)?;
        Ok(s)
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))
}

/// Reads and parses a file, tagging errors with its path.
pub fn load<T>(path: &Path, parse: impl FnOnce(&str) -> scenecut::Result<T>) -> CliResult<T> {
    parse(&read_text(path)?).map_err(|e| CliError::in_file(path, e))
}

/// Video id of an input: its file name without extension.
pub fn video_id(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty() && !s.contains([',', ' ', '\t']))
        .map(str::to_string)
        .ok_or_else(|| CliError::usage(format!("cannot derive a video id from {}", path.display())))
}

/// Inputs with their video ids, sorted by id; duplicate ids are refused.
pub fn inputs_by_id(settings: &Settings) -> CliResult<Vec<(String, PathBuf)>> {
    let inputs = settings.list("input");
    if inputs.is_empty() {
        return Err(CliError::usage("no --input given"));
    }
    let mut out = inputs
        .iter()
        .map(|p| {
            let path = PathBuf::from(p);
            Ok((video_id(&path)?, path))
        })
        .collect::<CliResult<Vec<_>>>()?;
    out.sort();
    let mut seen = BTreeSet::new();
    for (id, _) in &out {
        if !seen.insert(id) {
            return Err(CliError::usage(format!("two inputs share the video id {id}")));
        }
    }
    Ok(out)
}

/// Writes via a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    let fail = |e: std::io::Error| CliError::data(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Manifest path for an output file or directory.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest");
    output.with_file_name(name)
}

/// Writes the manifest next to the output and echoes it on stderr.
pub fn write_manifest(output: &Path, manifest: &Manifest) -> CliResult<()> {
    let text = manifest.render();
    eprint!("{text}");
    write_atomic(&manifest_path(output), &text)
}

/// Where each per-input result goes: the output file itself for a single
/// input, or `<output>/<id>.csv` for several.
pub fn per_input_outputs(output: &Path, ids: &[String]) -> Vec<PathBuf> {
    if ids.len() == 1 {
        vec![output.to_path_buf()]
    } else {
        ids.iter().map(|id| output.join(format!("{id}.csv"))).collect()
    }
}

/// Writes the result text or prints it when no output is given.
pub fn emit(output: Option<&Path>, text: &str, manifest: &Manifest) -> CliResult<()> {
    match output {
        Some(p) => {
            write_atomic(p, text)?;
            write_manifest(p, manifest)
        }
        None => {
            print!("{text}");
            eprint!("{}", manifest.render());
            Ok(())
        }
    }
}

/// Comma-separated reals.
pub fn parse_reals(raw: &str, key: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(format!("bad number {s:?} in {key}: {e}")))
        })
        .collect()
}

pub fn join_reals(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}
