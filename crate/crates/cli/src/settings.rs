//! `key = value` settings shared by config files, flags and manifests.
//!
//! A run manifest is itself a config file: it lists the command, the
//! toolkit version and every resolved setting, so passing it back through
//! `--config` repeats the run.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

/// Keys that may repeat; every other key must appear once per source.
const LIST_KEYS: [&str; 1] = ["input"];

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, Vec<String>>,
    used: RefCell<BTreeSet<String>>,
}

impl Settings {
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let mut values: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::usage(format!("{origin}:{}: expected key = value", i + 1)));
            };
            let (k, v) = (k.trim().replace('-', "_"), v.trim().to_string());
            if k.is_empty() {
                return Err(CliError::usage(format!("{origin}:{}: empty key", i + 1)));
            }
            let slot = values.entry(k.clone()).or_default();
            if !slot.is_empty() && !LIST_KEYS.contains(&k.as_str()) {
                return Err(CliError::usage(format!("{origin}:{}: duplicate key {k}", i + 1)));
            }
            slot.push(v);
        }
        Ok(Self {
            values,
            used: RefCell::default(),
        })
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Checks the `command` and `version` keys a manifest carries.
    pub fn expect_command(&self, command: &str) -> CliResult<()> {
        if let Some(c) = self.raw("command") {
            if c != command {
                return Err(CliError::usage(format!("config is for command {c:?}, not {command:?}")));
            }
        }
        if let Some(v) = self.raw("version") {
            if v != VERSION {
                eprintln!("warning: config written by version {v}, running {VERSION}");
            }
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), vec![value.to_string()]);
    }

    pub fn set_opt(&mut self, key: &str, value: Option<impl Display>) {
        if let Some(v) = value {
            self.set(key, v);
        }
    }

    /// Replaces a list key when `values` is nonempty.
    pub fn set_list(&mut self, key: &str, values: &[String]) {
        if !values.is_empty() {
            self.values.insert(key.to_string(), values.to_vec());
        }
    }

    /// Applies `KEY=VALUE` overrides from `--set`.
    pub fn apply_overrides(&mut self, pairs: &[String]) -> CliResult<()> {
        for p in pairs {
            let Some((k, v)) = p.split_once('=') else {
                return Err(CliError::usage(format!("--set expects KEY=VALUE, got {p:?}")));
            };
            let key = k.trim().replace('-', "_");
            if LIST_KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("use --{key} for {key}")));
            }
            self.set(&key, v.trim());
        }
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).and_then(|v| v.last()).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::usage(format!("bad value {v:?} for {key}: {e}")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::usage(format!("missing required setting {key} (flag --{})", key.replace('_', "-"))))
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key).cloned().unwrap_or_default()
    }

    /// Marks keys as accepted even though the command ignores them.
    pub fn allow(&self, keys: &[&str]) {
        self.used.borrow_mut().extend(keys.iter().map(|k| k.to_string()));
    }

    /// Rejects keys nothing asked for.
    pub fn finish(&self) -> CliResult<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k) && *k != "command" && *k != "version")
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::usage(format!("unknown setting(s): {}", unknown.join(", "))))
        }
    }
}

/// Resolved settings of one run, in the order they were recorded.
#[derive(Debug, Clone)]
pub struct Manifest {
    command: &'static str,
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# scenecut run manifest\ncommand = {}\nversion = {VERSION}\n",
            self.command
        );
        for (k, v) in &self.entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}
