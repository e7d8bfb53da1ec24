//! `lab.toml`: shared defaults plus named profiling experiments.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub fuel: u64,
    pub max_branches: usize,
    pub max_inputs: u64,
    pub slack: f64,
    pub seed: u64,
    pub experiments: BTreeMap<String, Experiment>,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            fuel: 100_000_000,
            max_branches: 100_000,
            max_inputs: 1 << 16,
            slack: 2.0,
            seed: 1,
            experiments: BTreeMap::new(),
        }
    }
}

/// One `[experiments.NAME]` table. Unset fields fall back to command-line
/// flags and then to the top-level defaults.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub machine: Option<String>,
    pub n: Option<String>,
    pub resource: Option<String>,
    pub measure: Option<String>,
    pub oracle_script: Option<bool>,
    pub fuel: Option<u64>,
    pub max_branches: Option<usize>,
    pub out: Option<String>,
    pub check: Option<String>,
    pub fit_at: Option<usize>,
    pub slack: Option<f64>,
    pub increasing: Option<bool>,
}

impl LabConfig {
    pub fn parse(text: &str) -> Result<LabConfig> {
        let cfg: LabConfig = toml::from_str(text)?;
        if cfg.slack.is_nan() || cfg.slack < 1.0 {
            bail!("slack must be at least 1, got {}", cfg.slack);
        }
        Ok(cfg)
    }

    /// Reads `path` when given, else `lab.toml` in the working directory if
    /// present, else built-in defaults.
    pub fn load(path: Option<&Path>) -> Result<LabConfig> {
        let implicit = Path::new("lab.toml");
        let path = match path {
            Some(p) => p,
            None if implicit.exists() => implicit,
            None => return Ok(LabConfig::default()),
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        LabConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn experiment(&self, name: &str) -> Result<&Experiment> {
        self.experiments.get(name).with_context(|| {
            let known: Vec<&str> = self.experiments.keys().map(String::as_str).collect();
            format!("no experiment {name:?} in config (known: {})", known.join(", "))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(LabConfig::parse("").unwrap(), LabConfig::default());
    }

    #[test]
    fn experiments_parse() {
        let cfg = LabConfig::parse(
            r#"
            slack = 3.0
            [experiments.t]
            machine = "L0"
            n = "2^6..2^8"
            check = "nlogn"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.slack, 3.0);
        let e = cfg.experiment("t").unwrap();
        assert_eq!(e.machine.as_deref(), Some("L0"));
        assert!(cfg.experiment("missing").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_small_slack() {
        assert!(LabConfig::parse("fule = 3").is_err());
        assert!(LabConfig::parse("slack = 0.5").is_err());
    }
}
