//! Flat `key = value` configuration with command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// A bad or missing parameter. Always names the field.
#[derive(Debug)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

pub fn invalid(field: &str, message: impl Into<String>) -> ValidationError {
    ValidationError { field: field.to_string(), message: message.into() }
}

/// One accepted key of a subcommand: name, default (None = required), help.
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default: Some(default), help }
}

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ValidationError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(origin, format!("line {}: expected `key = value`, got {raw:?}", n + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(invalid(origin, format!("line {}: empty key", n + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(invalid(k, format!("set twice in {origin}")));
        }
    }
    Ok(out)
}

impl Params {
    /// Defaults, then the config file, then explicit overrides. Keys outside
    /// `keys` are rejected; `command` is accepted and checked against `sub`.
    pub fn resolve(
        sub: &str,
        keys: &[Key],
        config: Option<&Path>,
        overrides: BTreeMap<String, String>,
    ) -> Result<Self, ValidationError> {
        let mut values = BTreeMap::new();
        for k in keys {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| invalid("config", format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_config(&text, "config")? {
                if k == "command" {
                    if v != sub {
                        return Err(invalid("command", format!("config is for `{v}`, not `{sub}`")));
                    }
                    continue;
                }
                if !keys.iter().any(|key| key.name == k) {
                    return Err(invalid(&k, format!("unknown key for `{sub}`")));
                }
                values.insert(k, v);
            }
        }
        values.extend(overrides);
        for k in keys {
            if !values.contains_key(k.name) {
                return Err(invalid(k.name, "required"));
            }
        }
        Ok(Self { values })
    }

    pub fn raw(&self, k: &str) -> &str {
        self.values.get(k).map(String::as_str).unwrap_or("")
    }

    pub fn str(&self, k: &str) -> String {
        self.raw(k).to_string()
    }

    pub fn f64(&self, k: &str) -> Result<f64, ValidationError> {
        let v: f64 = self.raw(k).parse().map_err(|_| invalid(k, format!("not a number: {:?}", self.raw(k))))?;
        if !v.is_finite() {
            return Err(invalid(k, "must be finite"));
        }
        Ok(v)
    }

    pub fn positive(&self, k: &str) -> Result<f64, ValidationError> {
        let v = self.f64(k)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(k, format!("must be > 0, got {v}")))
        }
    }

    pub fn usize(&self, k: &str) -> Result<usize, ValidationError> {
        self.raw(k).parse().map_err(|_| invalid(k, format!("not a non-negative integer: {:?}", self.raw(k))))
    }

    pub fn u64(&self, k: &str) -> Result<u64, ValidationError> {
        self.raw(k).parse().map_err(|_| invalid(k, format!("not a non-negative integer: {:?}", self.raw(k))))
    }

    pub fn bool(&self, k: &str) -> Result<bool, ValidationError> {
        match self.raw(k) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(invalid(k, format!("expected true or false, got {other:?}"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, k: &str) -> Result<Vec<f64>, ValidationError> {
        let raw = self.raw(k);
        if raw.trim().is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| {
                let v: f64 = s.trim().parse().map_err(|_| invalid(k, format!("bad list entry {:?}", s.trim())))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(invalid(k, "list entries must be finite"))
                }
            })
            .collect()
    }

    /// Strictly increasing positive radii.
    pub fn radii(&self, k: &str) -> Result<Vec<f64>, ValidationError> {
        let r = self.list(k)?;
        if r.is_empty() {
            return Err(invalid(k, "needs at least one radius"));
        }
        if r.iter().any(|v| *v <= 0.0) {
            return Err(invalid(k, "radii must be > 0"));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(k, "radii must be strictly increasing"));
        }
        Ok(r)
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}
