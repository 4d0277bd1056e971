//! `key = value` configuration files. `#` starts a comment; blank lines are
//! skipped. Command-line flags take precedence over file values, which take
//! precedence over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::io::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", k + 1))?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(format!("line {}: empty key", k + 1));
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("line {}: duplicate key `{key}`", k + 1));
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Config::parse(&text).map_err(|message| Error::Format { path: path.to_path_buf(), message })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| Error::Usage(format!("config key `{key}`: invalid value `{v}`"))))
            .transpose()
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn resolve<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    pub fn resolve_opt<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_precedence() {
        let c = Config::parse("# header\nmin-pts = 6  # trailing\n\nperplexity=12.5\n").unwrap();
        assert_eq!(c.get::<usize>("min_pts").unwrap(), Some(6));
        assert_eq!(c.resolve("perplexity", None, 30.0).unwrap(), 12.5);
        assert_eq!(c.resolve("perplexity", Some(5.0), 30.0).unwrap(), 5.0);
        assert_eq!(c.resolve("eps", None, 0.5).unwrap(), 0.5);
        assert!(c.get::<usize>("perplexity").is_err());
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(Config::parse("novalue").is_err());
        assert!(Config::parse("a=1\na=2").is_err());
        assert!(Config::parse(" = 3").is_err());
    }
}
