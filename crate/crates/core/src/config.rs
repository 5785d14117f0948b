//! Key/value configuration plumbing shared by the optimizer configs and the CLI.
//!
//! Config files are flat `key = value` text: one pair per line, `#` starts a
//! comment, blank lines are ignored, later pairs override earlier ones.

use std::fmt;

use crate::error::{OptError, Result};
use crate::hvadam::LrSchedule;

/// A typed configuration value, as reported by the `entries()` accessors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConfigValue {
    Float(f64),
    Schedule(LrSchedule),
}

impl fmt::Display for ConfigValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigValue::Float(x) => write!(f, "{x}"),
            ConfigValue::Schedule(s) => f.write_str(s.as_str()),
        }
    }
}

pub(crate) fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| OptError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        })
}

/// Splits `key=value`.
pub fn parse_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text.split_once('=').ok_or_else(|| OptError::InvalidValue {
        key: text.to_string(),
        value: String::new(),
    })?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(OptError::InvalidValue { key: String::new(), value: v.to_string() });
    }
    Ok((k.to_string(), v.to_string()))
}

/// Parses a whole config file into ordered pairs.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(parse_assignment)
        .collect()
}
