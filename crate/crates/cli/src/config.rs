// SPDX-License-Identifier: MIT OR Apache-2.0

//! Flat TOML config files whose keys mirror the long flag names, with `-`
//! written as `_`. Flags given on the command line win.

use std::path::Path;

use serde::de::DeserializeOwned;
use toml::{Table, Value};

use crate::error::{io_error, CliError, CliResult};

/// Every key a config file may set.
pub const KEYS: &[&str] = &[
    "model",
    "model_file",
    "u",
    "m",
    "k",
    "input",
    "inputs",
    "method",
    "class",
    "ig_steps",
    "epsilon",
    "format",
    "task",
    "seed",
    "count",
    "min_len",
    "max_len",
    "balanced_prefix",
    "sp_true",
    "closing_prob",
    "max_depth",
    "suite",
    "n",
    "out",
    "scores",
];

#[derive(Debug, Default, Clone)]
pub struct Config {
    table: Table,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_error("read config", path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let table: Table = text.parse().map_err(|e| CliError::Config(format!("config: {e}")))?;
        if let Some(bad) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(CliError::Config(format!("config: unknown key {bad:?}")));
        }
        if let Some((key, _)) = table.iter().find(|(_, v)| matches!(v, Value::Table(_) | Value::Array(_))) {
            return Err(CliError::Config(format!("config: key {key:?} must be a scalar")));
        }
        Ok(Self { table })
    }

    /// `flag` if given, otherwise the config value for `key`.
    pub fn or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(value) => {
                value.clone().try_into().map(Some).map_err(|e| CliError::Config(format!("config: key {key:?}: {e}")))
            }
        }
    }

    /// Boolean switches: on if the flag is set or the config says true.
    pub fn switch(&self, flag: bool, key: &str) -> CliResult<bool> {
        Ok(flag || self.or::<bool>(None, key)?.unwrap_or(false))
    }

    /// Float settings also accept integer literals (`m = 12`).
    pub fn float(&self, flag: Option<f64>, key: &str) -> CliResult<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(other) => Err(CliError::Config(format!("config: key {key:?} must be a number, got {other}"))),
        }
    }
}
