//! Flat `key = value` settings text with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ConfigError;

/// Parsed entries keyed by name, each remembering its source line.
#[derive(Debug, Default)]
pub struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let key = k.trim();
            let value = v.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("invalid key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("missing value for `{key}`"),
                });
            }
            if map
                .insert(key.to_string(), (value.to_string(), line))
                .is_some()
            {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { map })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(v, _)| v.as_str())
    }

    fn line_of(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(_, l)| *l)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.parse::<f64>().map(Some).map_err(|_| ConfigError::Parse {
            line: self.line_of(key),
            message: format!("`{key}` is not a number: `{v}`"),
        })
    }

    pub fn req_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.f64(key)?
            .ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.parse::<usize>()
            .map(Some)
            .map_err(|_| ConfigError::Parse {
                line: self.line_of(key),
                message: format!("`{key}` is not a non-negative integer: `{v}`"),
            })
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some("true") => Ok(Some(true)),
            Some("false") => Ok(Some(false)),
            Some(v) => Err(ConfigError::Parse {
                line: self.line_of(key),
                message: format!("`{key}` must be true or false, found `{v}`"),
            }),
        }
    }

    /// A `lo, hi` pair.
    pub fn pair(&self, key: &str) -> Result<Option<(f64, f64)>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        let bad = || ConfigError::Parse {
            line: self.line_of(key),
            message: format!("`{key}` must be `lo, hi`, found `{v}`"),
        };
        let (a, b) = v.split_once(',').ok_or_else(bad)?;
        let lo = a.trim().parse::<f64>().map_err(|_| bad())?;
        let hi = b.trim().parse::<f64>().map_err(|_| bad())?;
        Ok(Some((lo, hi)))
    }
}

/// Accumulates `key = value` lines; floats use the shortest round-trip form.
#[derive(Default)]
pub struct Writer {
    out: String,
}

impl Writer {
    pub fn section(&mut self, title: &str) {
        if !self.out.is_empty() {
            self.out.push('\n');
        }
        let _ = writeln!(self.out, "# {title}");
    }

    pub fn f64(&mut self, key: &str, v: f64) {
        let _ = writeln!(self.out, "{key} = {v:?}");
    }

    pub fn display(&mut self, key: &str, v: impl std::fmt::Display) {
        let _ = writeln!(self.out, "{key} = {v}");
    }

    pub fn pair(&mut self, key: &str, (lo, hi): (f64, f64)) {
        let _ = writeln!(self.out, "{key} = {lo:?}, {hi:?}");
    }

    pub fn finish(self) -> String {
        self.out
    }
}
