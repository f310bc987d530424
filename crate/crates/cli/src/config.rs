//! Optional flat TOML file supplying defaults for command flags.
//!
//! Keys are flag names with underscores (`xi0_sq = 0.1`). Flags given on the
//! command line win. Keys the command never reads are rejected so typos do
//! not silently fall back to defaults.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use anyhow::{Context, Result};

use crate::UsageError;

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, toml::Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Config::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (k, v) in table {
            if v.is_table() {
                return Err(UsageError(format!("config key `{k}`: nested tables are not supported")).into());
            }
            values.insert(k, v);
        }
        Ok(Config {
            values,
            used: RefCell::default(),
        })
    }

    fn get(&self, key: &str) -> Option<&toml::Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.values.get(key)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => as_f64(v).map(Some).ok_or_else(|| type_error(key, "a number")),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(type_error(key, "a non-negative integer")),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(type_error(key, "a string")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| as_f64(v).ok_or_else(|| type_error(key, "an array of numbers")))
                .collect::<Result<_>>()
                .map(Some),
            Some(_) => Err(type_error(key, "an array of numbers")),
        }
    }

    pub fn string_list(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| type_error(key, "an array of strings"))
                })
                .collect::<Result<_>>()
                .map(Some),
            Some(_) => Err(type_error(key, "an array of strings")),
        }
    }

    /// Fails if the file holds keys nobody asked for.
    pub fn finish(&self) -> Result<()> {
        let used = self.used.borrow();
        let unknown: Vec<&str> = self
            .values
            .keys()
            .filter(|k| !used.contains(*k))
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(UsageError(format!("unknown config keys for this command: {}", unknown.join(", "))).into())
        }
    }
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn type_error(key: &str, what: &str) -> anyhow::Error {
    UsageError(format!("config key `{key}` must be {what}")).into()
}
