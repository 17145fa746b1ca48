//! Flat key/value configuration files.
//!
//! ```text
//! # comment
//! seed = 7
//! [toy]
//! widths = 16, 128
//! ```
//!
//! Keys inside a `[section]` are stored as `section.key`. Later assignments
//! override earlier ones, and command-line overrides are applied on top.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{LabError, LabResult};

/// Parsed configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses configuration text.
    pub fn parse(text: &str) -> LabResult<Self> {
        let mut values = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| LabError::Config(format!("line {}: unterminated section header", lineno + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(LabError::Config(format!("line {}: empty key", lineno + 1)));
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            values.insert(full, value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Reads and parses a file.
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Sets or replaces a key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    /// Applies `key=value` overrides.
    pub fn apply_overrides(&mut self, overrides: &[String]) -> LabResult<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| LabError::Config(format!("override '{o}' must look like key=value")))?;
            self.set(k.trim(), v.trim());
        }
        Ok(())
    }

    /// Raw value of a key.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Keys under `prefix.` with the prefix stripped.
    pub fn section(&self, prefix: &str) -> BTreeMap<String, String> {
        let p = format!("{prefix}.");
        self.values
            .iter()
            .filter_map(|(k, v)| k.strip_prefix(&p).map(|s| (s.to_string(), v.clone())))
            .collect()
    }

    /// Typed value with a default.
    pub fn value<T: FromStr>(&self, key: &str, default: T) -> LabResult<T> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| LabError::Config(format!("invalid value '{v}' for '{key}'"))),
        }
    }

    /// Comma-separated list with a default.
    pub fn list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> LabResult<Vec<T>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| LabError::Config(format!("invalid list entry '{s}' for '{key}'"))))
                .collect(),
        }
    }

    /// Comma-separated list of strings with a default.
    pub fn names(&self, key: &str, default: &[&str]) -> Vec<String> {
        match self.get(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(v) => v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
        }
    }

    /// The experiment seed (`seed`, default 0).
    pub fn seed(&self) -> LabResult<u64> {
        self.value("seed", 0)
    }
}
