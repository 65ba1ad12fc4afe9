//! Flat `key = value` configuration files. CLI flags take precedence;
//! unknown keys are rejected against the active subcommand's key set.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path, allowed: &[&str]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {} is not `key = value`: {raw:?}", lineno + 1);
            };
            let key = key.trim().to_string();
            if !allowed.contains(&key.as_str()) {
                bail!(
                    "unknown config key {key:?} (allowed: {})",
                    allowed.join(", ")
                );
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    /// CLI value if given, else the config entry parsed, else the default.
    pub fn resolve<T: std::str::FromStr>(
        &self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = cli {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map_err(|e| anyhow::anyhow!("config key {key} = {raw:?}: {e}")),
            None => Ok(default),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }
}
