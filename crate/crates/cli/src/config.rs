//! Experiment configs: flat `key = value` lines grouped under `[section]`
//! headers.
//!
//! ```text
//! # comment
//! [run]
//! scenario = kloosterman-tower
//! seed = 7
//! cap = 16777216
//! out = out/tower
//!
//! [params]
//! recipe = tower:p=2:sched=1,2,4,8,16
//! k_max = 5
//! ```
//!
//! `[run]` accepts `scenario`, `seed`, `cap` and `out`; `[params]` holds the
//! scenario parameters listed by `folner-lab list --verbose`. Keys may not
//! repeat. Lines starting with `#` or `;` are comments.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub scenario: String,
    pub seed: Option<u64>,
    pub cap: Option<u64>,
    pub out: Option<PathBuf>,
    pub params: BTreeMap<String, String>,
}

fn parse_num(key: &str, v: &str) -> CliResult<u64> {
    v.parse()
        .map_err(|_| CliError::Parse(format!("`{key}` must be an unsigned integer, got `{v}`")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = || format!("line {}", i + 1);
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                if section != "run" && section != "params" {
                    return Err(CliError::Parse(format!(
                        "{}: unknown section [{section}]",
                        at()
                    )));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("{}: expected `key = value`", at())))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(CliError::Parse(format!("{}: empty key", at())));
            }
            if !seen.insert(format!("{section}.{key}")) {
                return Err(CliError::Parse(format!("{}: duplicate key `{key}`", at())));
            }
            match (section.as_str(), key) {
                ("run", "scenario") => cfg.scenario = value.to_string(),
                ("run", "seed") => cfg.seed = Some(parse_num(key, value)?),
                ("run", "cap") => cfg.cap = Some(parse_num(key, value)?),
                ("run", "out") => cfg.out = Some(PathBuf::from(value)),
                ("run", _) => {
                    return Err(CliError::Parse(format!(
                        "{}: unknown key `{key}` in [run]",
                        at()
                    )))
                }
                ("params", _) => {
                    cfg.params.insert(key.to_string(), value.to_string());
                }
                _ => {
                    return Err(CliError::Parse(format!(
                        "{}: `{key}` outside a section",
                        at()
                    )))
                }
            }
        }
        if cfg.scenario.is_empty() {
            return Err(CliError::Parse("config names no scenario".into()));
        }
        Ok(cfg)
    }
}

/// Fully resolved inputs of one run; its hash identifies the artifacts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedConfig {
    pub scenario: String,
    pub seed: u64,
    pub cap: u64,
    pub params: BTreeMap<String, String>,
}

impl ResolvedConfig {
    pub fn canonical(&self) -> String {
        let mut s = format!(
            "[run]\nscenario = {}\nseed = {}\ncap = {}\n[params]\n",
            self.scenario, self.seed, self.cap
        );
        for (k, v) in &self.params {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_comments() {
        let cfg = ExperimentConfig::parse(
            "# top\n[run]\nscenario = hyperbola\nseed=9\n\n[params]\n; note\nq = 3, 5\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, "hyperbola");
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.params["q"], "3, 5");
    }

    #[test]
    fn rejects_bad_lines() {
        for bad in [
            "[run]\nscenario = a\nscenario = b\n",
            "[other]\nx = 1\n",
            "scenario = a\n",
            "[run]\nscenario\n",
            "[run]\nseed = -1\nscenario = a\n",
            "[params]\nq = 3\n",
        ] {
            assert!(
                matches!(ExperimentConfig::parse(bad), Err(CliError::Parse(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn hash_ignores_param_order() {
        let a = ExperimentConfig::parse("[run]\nscenario = s\n[params]\nx = 1\ny = 2\n").unwrap();
        let b = ExperimentConfig::parse("[params]\ny = 2\nx = 1\n[run]\nscenario = s\n").unwrap();
        let r = |c: ExperimentConfig| ResolvedConfig {
            scenario: c.scenario,
            seed: 1,
            cap: 2,
            params: c.params,
        };
        assert_eq!(r(a).hash(), r(b).hash());
    }
}
