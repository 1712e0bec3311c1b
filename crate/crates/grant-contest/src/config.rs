//! Experiment config files.
//!
//! TOML with one table per subcommand, keyed by the long flag name, plus
//! top-level keys shared by every subcommand:
//!
//! ```toml
//! k = 0.3333333333333333
//! theta = 10
//!
//! [sweep]
//! paylines = [0.1, 0.2, 0.5]
//! externality = "inverse-cost"
//! r = 2
//!
//! [mc-check]
//! seed = 7
//! ```
//!
//! A value given on the command line wins over the subcommand table, which
//! wins over the top level, which wins over the built-in default.

use std::path::Path;

use toml::{Table, Value};

use crate::error::AppError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    table: Table,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
        Ok(Self { table })
    }

    fn lookup(&self, section: &str, key: &str) -> Option<&Value> {
        self.table
            .get(section)
            .and_then(Value::as_table)
            .and_then(|t| t.get(key))
            .or_else(|| self.table.get(key).filter(|v| !v.is_table()))
    }

    fn wrong_type(section: &str, key: &str, expected: &str) -> AppError {
        AppError::Config(format!("[{section}] `{key}` must be {expected}"))
    }

    pub fn f64(&self, section: &str, key: &str) -> Result<Option<f64>, AppError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Self::wrong_type(section, key, "a number")),
        }
    }

    pub fn u64(&self, section: &str, key: &str) -> Result<Option<u64>, AppError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(Self::wrong_type(section, key, "a nonnegative integer")),
        }
    }

    pub fn usize(&self, section: &str, key: &str) -> Result<Option<usize>, AppError> {
        Ok(self.u64(section, key)?.map(|v| v as usize))
    }

    pub fn string(&self, section: &str, key: &str) -> Result<Option<String>, AppError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Self::wrong_type(section, key, "a string")),
        }
    }

    /// A list of numbers, or a single number treated as a one-element list.
    pub fn f64_list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, AppError> {
        let num = |v: &Value| match v {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        match self.lookup(section, key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(num)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| Self::wrong_type(section, key, "a list of numbers")),
            Some(v) => num(v)
                .map(|x| Some(vec![x]))
                .ok_or_else(|| Self::wrong_type(section, key, "a list of numbers")),
        }
    }

    pub fn string_list(&self, section: &str, key: &str) -> Result<Option<Vec<String>>, AppError> {
        match self.lookup(section, key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(vec![s.clone()])),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string))
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| Self::wrong_type(section, key, "a list of strings")),
            Some(_) => Err(Self::wrong_type(section, key, "a list of strings")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = r#"
k = 0.25
theta = 10

[sweep]
k = 0.5
paylines = [0.1, 0.2]
externality = "none"

[bids]
payline = 1
"#;

    #[test]
    fn section_overrides_top_level() {
        let c = Config::parse(TEXT).unwrap();
        assert_eq!(c.f64("sweep", "k").unwrap(), Some(0.5));
        assert_eq!(c.f64("bids", "k").unwrap(), Some(0.25));
        assert_eq!(c.f64("bids", "theta").unwrap(), Some(10.0));
        assert_eq!(c.f64("bids", "payline").unwrap(), Some(1.0));
        assert_eq!(c.f64_list("sweep", "paylines").unwrap(), Some(vec![0.1, 0.2]));
        assert_eq!(c.string("sweep", "externality").unwrap().as_deref(), Some("none"));
        assert_eq!(c.f64("sweep", "missing").unwrap(), None);
    }

    #[test]
    fn section_tables_are_not_values() {
        let c = Config::parse(TEXT).unwrap();
        assert_eq!(c.f64("mc-check", "sweep").ok(), Some(None));
    }

    #[test]
    fn type_errors() {
        let c = Config::parse(TEXT).unwrap();
        assert!(c.f64("sweep", "externality").is_err());
        assert!(c.u64("sweep", "k").is_err());
        assert!(Config::parse("k = ").is_err());
    }
}
