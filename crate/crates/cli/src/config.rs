//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! n = 128,4,4
//! length = 16pi,2pi,2pi
//! ic = sech
//! ```
//!
//! Keys are the long flag names; `-` and `_` are interchangeable.

use std::collections::BTreeMap;
use std::fmt;

/// Every key a config file may set.
pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "length",
    "dt",
    "steps",
    "ic",
    "amplitude",
    "width",
    "modes",
    "axis",
    "center",
    "workers",
    "repeats",
    "machine",
    "dealias",
    "blowup_threshold",
    "diagnostics_every",
    "energy_out",
    "checkpoint",
    "resume",
    "out_dir",
    "machines",
    "chip_bandwidth",
    "cores_per_node",
    "variant",
    "log2",
    "out",
    "overlay",
    "fit",
    "d1",
    "d2",
    "d3",
    "bc",
    "ln",
    "p",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

impl ConfigFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Line the key was set on.
    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|(l, _)| *l)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ConfigError { line, message };
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(format!("expected key = value, found '{content}'")))?;
        let key = normalize_key(key);
        if key.is_empty() {
            return Err(err("empty key".into()));
        }
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key '{key}'")));
        }
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        if let Some((first, _)) = entries.get(&key) {
            return Err(err(format!("'{key}' already set on line {first}")));
        }
        entries.insert(key, (line, value.to_owned()));
    }
    Ok(ConfigFile { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries() {
        let c = parse_config("# run\nn = 128,4,4\n\nblowup-threshold=1e8\nmachine = \"my box\"\n").unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.get("n"), Some("128,4,4"));
        assert_eq!(c.get("blowup_threshold"), Some("1e8"));
        assert_eq!(c.get("machine"), Some("my box"));
        assert_eq!(c.line("machine"), Some(5));
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(parse_config("n = 8\nbogus = 1").unwrap_err().line, 2);
        assert_eq!(parse_config("\n\njust text").unwrap_err().line, 3);
        assert_eq!(parse_config("n=8\nn=16").unwrap_err().line, 2);
        assert!(parse_config(" = 3").is_err());
    }
}
