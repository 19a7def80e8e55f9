//! Flat `key = value` configuration files.
//!
//! Keys are the long flag names (`max-rank` and `max_rank` are the same key).
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! taken relative to the working directory.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = normalize(k);
            if key.is_empty() {
                return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
            }
            if values.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(ConfigFile::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    /// The flag value if given, else the config value, else `None`.
    pub fn resolve<T>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: invalid value `{v}`: {e}"))),
        }
    }

    /// Like [`resolve`](Self::resolve) with a default.
    pub fn value_or<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.resolve(key, flag)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let c = ConfigFile::parse("# run\nseed = 4\nmax_rank=12\n\nloss = single").unwrap();
        assert_eq!(c.value_or("seed", None::<u64>, 0).unwrap(), 4);
        assert_eq!(c.value_or("seed", Some(9u64), 0).unwrap(), 9);
        assert_eq!(c.resolve::<usize>("max-rank", None).unwrap(), Some(12));
        assert_eq!(c.value_or("workers", None::<usize>, 1).unwrap(), 1);
    }

    #[test]
    fn bad_lines_are_usage_errors() {
        assert!(matches!(ConfigFile::parse("seed 4"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigFile::parse("seed=1\nseed=2"), Err(CliError::Usage(_))));
        let c = ConfigFile::parse("seed = x").unwrap();
        assert!(matches!(c.resolve::<u64>("seed", None), Err(CliError::Usage(_))));
    }
}
