//! Plain `key = value` scenario files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CcaError, Result};

/// Keys accepted in a config file; each matches a long flag.
pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "omega",
    "j",
    "state",
    "fock",
    "coherent",
    "pair",
    "labels",
    "photons",
    "start",
    "stop",
    "points",
    "times",
    "theta",
    "concurrence",
    "gamma",
    "dt",
    "tol",
    "closed-form",
    "peak",
    "output",
    "out-dir",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CcaError::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CcaError::Config(format!("bad value for '{key}': '{raw}'"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.entries.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true" | "yes" | "1" | "") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(other) => Err(CcaError::Config(format!(
                "bad boolean for '{key}': '{other}'"
            ))),
        }
    }
}

impl FromStr for ConfigFile {
    type Err = CcaError;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').unwrap_or((line, ""));
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CcaError::Config(format!(
                    "line {}: unknown key '{key}'",
                    lineno + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }
}
