//! Flat `key = value` configuration files and the flag > file > default
//! resolution of the common options.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};

/// Keys a configuration file may set; they mirror the common flags.
pub const KEYS: [&str; 9] = ["model", "x", "t", "s", "T", "order", "format", "out", "jobs"];

/// A usage problem: bad flag values, malformed configuration, missing inputs.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Parsed configuration; later duplicate keys override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parses `key = value` lines, ignoring blank lines and `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("config line {}: expected `key = value`", idx + 1)));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(usage(format!(
                    "config line {}: unknown key `{key}` (expected one of {})",
                    idx + 1,
                    KEYS.join(", ")
                )));
            }
            if value.is_empty() {
                return Err(usage(format!("config line {}: empty value for `{key}`", idx + 1)));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if given, else the configured value.
    pub fn pick(&self, key: &str, flag: Option<&str>) -> Option<String> {
        flag.map(str::to_string).or_else(|| self.get(key).map(str::to_string))
    }
}
