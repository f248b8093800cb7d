//! `key = value` configuration files for the command line tool.
//!
//! Keys are the long flag names (`surface`, `energy`, `N`, `workers`, ...)
//! plus any [`SectionOptions`] field (`tol_f`, `seed_grid`, ...). Blank
//! lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use crate::dynamics::SectionOptions;
use crate::error::ConfigError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let k = k.trim().to_string();
            if k.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    message: "empty key".to_string(),
                });
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Typed value of `key`, if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::Value {
                key: key.to_string(),
                value: v.to_string(),
            }),
        }
    }

    /// Entries naming a [`SectionOptions`] field.
    pub fn tolerance_overrides(&self) -> Vec<(String, String)> {
        let known = tolerance_keys();
        self.values
            .iter()
            .filter(|(k, _)| known.contains(k))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Field names of [`SectionOptions`].
pub fn tolerance_keys() -> Vec<String> {
    match serde_json::to_value(SectionOptions::default()) {
        Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Sets one field of `opts` from its text value.
pub fn set_tolerance(opts: &mut SectionOptions, key: &str, value: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
    };
    let serde_json::Value::Object(mut map) = serde_json::to_value(&*opts).map_err(|_| bad())? else {
        return Err(bad());
    };
    if !map.contains_key(key) {
        return Err(ConfigError::UnknownKey(key.to_string()));
    }
    let parsed: serde_json::Value = if value == "none" {
        serde_json::Value::Null
    } else {
        serde_json::from_str(value).map_err(|_| bad())?
    };
    map.insert(key.to_string(), parsed);
    *opts = serde_json::from_value(serde_json::Value::Object(map)).map_err(|_| bad())?;
    Ok(())
}
