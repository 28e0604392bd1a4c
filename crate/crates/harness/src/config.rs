//! Flat `key = value` parameters. Keys are case-folded and `-` becomes `_`,
//! so `--a-const` on the command line and `a_const` in a file are the same key.

use crate::error::{invalid, HarnessError, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    map: BTreeMap<String, String>,
}

pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").to_lowercase().replace('-', "_")
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parse a config file body. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Params::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::Usage(format!("config line {}: expected `key = value`, got `{raw}`", n + 1))
            })?;
            let k = normalize_key(k);
            if k.is_empty() {
                return Err(HarnessError::Usage(format!("config line {}: empty key", n + 1)));
            }
            p.set(&k, v.trim());
        }
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.map.insert(normalize_key(key), value.into());
    }

    /// `--key value`, `--key=value`, or a bare `--flag` (meaning `true`).
    /// Later values override earlier ones, so CLI arguments applied after a
    /// config file win.
    pub fn apply_args(&mut self, args: &[String]) -> Result<()> {
        let mut i = 0;
        while i < args.len() {
            let a = &args[i];
            let Some(body) = a.strip_prefix("--") else {
                return Err(HarnessError::Usage(format!("unexpected argument `{a}`")));
            };
            if let Some((k, v)) = body.split_once('=') {
                self.set(k, v);
                i += 1;
            } else if i + 1 < args.len() && !is_flag(&args[i + 1]) {
                self.set(body, args[i + 1].clone());
                i += 2;
            } else {
                self.set(body, "true");
                i += 1;
            }
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &Params) {
        for (k, v) in &other.map {
            self.map.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| invalid(format!("{key} = `{v}` is not a finite number")))
            })
            .transpose()
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key)?.unwrap_or(default))
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| invalid(format!("{key} = `{v}` is not a non-negative integer"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| invalid(format!("{key} = `{v}` is not a u64"))),
        }
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") => Ok(true),
            Some(v) => Err(invalid(format!("{key} = `{v}` is not a boolean"))),
        }
    }

    /// Unknown keys are usage errors so typos do not silently fall back to defaults.
    pub fn check_known(&self, problem: &str, known: &[&str]) -> Result<()> {
        for k in self.keys() {
            if !known.contains(&k) {
                return Err(HarnessError::Usage(format!(
                    "unknown parameter `{k}` for {problem} (known: {})",
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }
}

fn is_flag(s: &str) -> bool {
    s.starts_with("--") && !s[2..].starts_with(|c: char| c.is_ascii_digit() || c == '.')
}
