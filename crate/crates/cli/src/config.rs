//! Plain `key = value` configuration files.

use std::collections::BTreeMap;
use std::str::FromStr;

pub const KEYS: &[&str] = &[
    "server",
    "delta",
    "deltas",
    "seed",
    "lambda_max",
    "xtol",
    "min_runs",
    "run_increment",
    "max_runs",
    "final_runs",
    "max_sweeps",
    "report_loss",
    "jaccard_common_only",
    "warm_start",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected `key = value`", i + 1));
            };
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{key}`", i + 1));
            }
            values.insert(key, value.trim().to_owned());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| format!("config: invalid value `{v}` for `{key}`")))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let cfg = ConfigFile::parse("# solver\ndelta = 0.05\nmax-runs=40\n\nreport_loss = true\n").unwrap();
        assert_eq!(cfg.get::<f64>("delta").unwrap(), Some(0.05));
        assert_eq!(cfg.get::<usize>("max_runs").unwrap(), Some(40));
        assert_eq!(cfg.get::<bool>("report_loss").unwrap(), Some(true));
        assert_eq!(cfg.get::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(ConfigFile::parse("delta 0.1").unwrap_err().contains("line 1"));
        assert!(ConfigFile::parse("colour = red").unwrap_err().contains("unknown key"));
        let cfg = ConfigFile::parse("seed = x").unwrap();
        assert!(cfg.get::<u64>("seed").is_err());
    }
}
