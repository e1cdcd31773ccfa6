//! Plain-text run configuration: `key = value` lines with `#` comments.
//!
//! Resolution order is defaults, then config file, then command-line flags;
//! [`Config::merge`] applies one layer on top of another.  Values stay
//! strings until a typed getter parses them, so unknown keys survive a
//! round trip and a sweep's canonical form hashes everything it was given.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Config::default()
    }

    /// Parse `key = value` lines.  `#` starts a comment, blank lines are
    /// skipped, later assignments to the same key win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            if key.is_empty()
                || !key
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            {
                return Err(Error::Config(format!(
                    "line {}: invalid key {key:?}",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// New configuration with `overrides` layered on top of `self`.
    pub fn merge(mut self, overrides: &Config) -> Self {
        for (k, v) in &overrides.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Sorted `key = value` rendering; the hashing basis for provenance.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    fn parse_with<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => f(raw).map(Some).ok_or_else(|| {
                Error::Config(format!("key {key}: cannot parse {raw:?} as {what}"))
            }),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_with(key, "a number", |s| s.parse().ok().filter(|v: &f64| v.is_finite()))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_with(key, "an integer", |s| s.parse().ok())
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>> {
        self.parse_with(key, "an integer", |s| s.parse().ok())
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_with(key, "an integer", |s| s.parse().ok())
    }

    /// Number list: either comma-separated values (`0, 1, 2`) or an
    /// inclusive linear grid `lo:hi:n`.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => parse_f64_list(raw)
                .map(Some)
                .map_err(|msg| Error::Config(format!("key {key}: {msg}"))),
        }
    }

    /// Required-key variants used when assembling a sweep.
    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.get_f64(key)?.ok_or_else(|| missing(key))
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.get_usize(key)?.ok_or_else(|| missing(key))
    }

    pub fn require_u64(&self, key: &str) -> Result<u64> {
        self.get_u64(key)?.ok_or_else(|| missing(key))
    }

    pub fn require_u32(&self, key: &str) -> Result<u32> {
        self.get_u32(key)?.ok_or_else(|| missing(key))
    }

    pub fn require_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get_f64_list(key)?.ok_or_else(|| missing(key))
    }
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing required key {key}"))
}

/// Parse `a, b, c` or `lo:hi:n` (inclusive endpoints, `n` points).
pub fn parse_f64_list(raw: &str) -> std::result::Result<Vec<f64>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if raw.contains(':') {
        let parts: Vec<&str> = raw.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid spec {raw:?} must be lo:hi:n"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| format!("bad grid start {:?}", parts[0]))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| format!("bad grid end {:?}", parts[1]))?;
        let n: usize = parts[2].trim().parse().map_err(|_| format!("bad grid count {:?}", parts[2]))?;
        if !(lo.is_finite() && hi.is_finite()) || n == 0 {
            return Err(format!("grid spec {raw:?} must have finite endpoints and n >= 1"));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        return Ok((0..n).map(|i| lo + step * i as f64).collect());
    }
    raw.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("cannot parse {s:?} as a number"))
        })
        .collect()
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let cfg = Config::parse(
            "# run setup\n\
             k = 2.8\n\
             \n\
             noise = 0, 1, 2   # three levels\n\
             seed = 42\n",
        )
        .unwrap();
        assert_eq!(cfg.get_f64("k").unwrap(), Some(2.8));
        assert_eq!(cfg.get_f64_list("noise").unwrap().unwrap(), vec![0.0, 1.0, 2.0]);
        assert_eq!(cfg.get_u64("seed").unwrap(), Some(42));
        assert_eq!(cfg.get("absent"), None);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(Config::parse("just words\n").is_err());
        assert!(Config::parse("bad key! = 3\n").is_err());
        let cfg = Config::parse("k = fast\n").unwrap();
        assert!(matches!(cfg.get_f64("k"), Err(Error::Config(_))));
        let cfg = Config::parse("k = inf\n").unwrap();
        assert!(cfg.get_f64("k").is_err());
    }

    #[test]
    fn merge_prefers_the_override_layer() {
        let mut defaults = Config::new();
        defaults.set("k", 2.8);
        defaults.set("t", 20);
        let mut flags = Config::new();
        flags.set("t", 50);
        let merged = defaults.merge(&flags);
        assert_eq!(merged.get_f64("k").unwrap(), Some(2.8));
        assert_eq!(merged.get_usize("t").unwrap(), Some(50));
    }

    #[test]
    fn grid_lists_are_inclusive() {
        let grid = parse_f64_list("-0.2 : 0.2 : 5").unwrap();
        assert_eq!(grid.len(), 5);
        assert!((grid[0] + 0.2).abs() < 1e-15);
        assert!((grid[4] - 0.2).abs() < 1e-15);
        assert!((grid[2]).abs() < 1e-15);
        assert_eq!(parse_f64_list("1:2:1").unwrap(), vec![1.0]);
        assert!(parse_f64_list("1:2").is_err());
        assert!(parse_f64_list("1,two,3").is_err());
        assert_eq!(parse_f64_list("").unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn canonical_form_is_sorted_and_stable() {
        let mut a = Config::new();
        a.set("zeta", 1);
        a.set("alpha", 2);
        let mut b = Config::new();
        b.set("alpha", 2);
        b.set("zeta", 1);
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical(), "alpha = 2\nzeta = 1\n");
    }
}
