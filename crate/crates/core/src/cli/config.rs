//! `key = value` run files.
//!
//! One setting per line. Blank lines and lines starting with `#` are
//! skipped. Keys are the long flag names without the leading dashes
//! (`t`, `gamma`, `lmn`, `n-max`, ...); list values are separated by
//! whitespace, e.g. `lmn = 2 0 0`.

use std::collections::BTreeMap;
use std::path::Path;

pub const KEYS: &[&str] = &[
    "t",
    "gamma",
    "lmn",
    "method",
    "accel",
    "tol",
    "n-max",
    "format",
    "out",
    "t-range",
    "gamma-range",
    "terms",
    "no-timing",
];

/// Parsed settings, keyed by flag name. Later lines win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("config line {}: expected key = value", lineno + 1));
            };
            let key = key.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("config line {}: unknown key '{key}'", lineno + 1));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| format!("config key '{key}': cannot parse '{v}'"))
            })
            .transpose()
    }

    /// Whitespace-separated list of exactly `N` values.
    pub fn get_array<T: std::str::FromStr + Copy + Default, const N: usize>(
        &self,
        key: &str,
    ) -> Result<Option<[T; N]>, String> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let parts: Vec<&str> = v.split_whitespace().collect();
        if parts.len() != N {
            return Err(format!("config key '{key}' needs {N} values, got '{v}'"));
        }
        let mut out = [T::default(); N];
        for (slot, p) in out.iter_mut().zip(parts) {
            *slot = p
                .parse()
                .map_err(|_| format!("config key '{key}': cannot parse '{p}'"))?;
        }
        Ok(Some(out))
    }
}
