//! `key=value` configuration files. Keys are the long option names of the
//! subcommand (`d-exp`, `eps`, `methods`, ...); flags given on the command
//! line take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{usage, CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return usage(format!("config line {}: expected key=value, got `{line}`", i + 1));
            };
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Reject keys the current subcommand does not understand.
    pub fn check_keys(&self, allowed: &[&str]) -> CliResult<()> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) {
                return usage(format!("unknown config key `{k}`"));
            }
        }
        Ok(())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|_| CliError::Usage(format!("bad value `{v}` for `{key}`"))))
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.values
            .get(key)
            .map(|v| parse_list(v).map_err(|_| CliError::Usage(format!("bad list `{v}` for `{key}`"))))
            .transpose()
    }

    pub fn get_flag(&self, key: &str) -> CliResult<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>, T::Err> {
    text.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

/// The flag if given, else the config file entry.
pub fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str) -> CliResult<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get(key),
    }
}

pub fn pick_list<T: FromStr>(flag: Option<Vec<T>>, file: &ConfigFile, key: &str) -> CliResult<Option<Vec<T>>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => file.get_list(key),
    }
}
