//! Artifacts, run summaries and the manifest, written atomically.

use std::fs;
use std::path::{Path, PathBuf};

use folner_core::charsums::SumSeries;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ResolvedConfig;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json(name: &str, value: &serde_json::Value) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("json values serialize");
        bytes.push(b'\n');
        Artifact {
            name: name.to_string(),
            bytes,
        }
    }

    pub fn csv(name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory csv");
        for r in rows {
            w.write_record(&r).expect("in-memory csv");
        }
        Artifact {
            name: name.to_string(),
            bytes: w.into_inner().expect("in-memory csv"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Failing checks make the run fail.
    Assert,
    /// Checks are observations only.
    Report,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub checks: Vec<Check>,
    /// First and last series index, when the scenario walks a recipe.
    pub indices: Option<(usize, usize)>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn float(x: f64) -> String {
    format!("{x}")
}

/// `k,support_size,re,im,abs,exact,value`; `value` is the exact cyclotomic
/// form when `exact` is true and empty otherwise.
pub fn series_csv(name: &str, s: &SumSeries) -> Artifact {
    let rows = s
        .terms
        .iter()
        .map(|t| {
            let z = t.complex();
            vec![
                t.k.to_string(),
                t.support_size.to_string(),
                float(z.re),
                float(z.im),
                float(t.abs()),
                t.exact().to_string(),
                t.value.exact().map(|c| c.format()).unwrap_or_default(),
            ]
        })
        .collect();
    Artifact::csv(
        name,
        &["k", "support_size", "re", "im", "abs", "exact", "value"],
        rows,
    )
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes to a sibling temporary file, then renames over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Parse(format!("`{}` is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

pub fn summary(cfg: &ResolvedConfig, mode: Mode, outcome: &Outcome, passed: bool) -> Artifact {
    Artifact::json(
        "summary.json",
        &json!({
            "scenario": cfg.scenario,
            "mode": mode,
            "passed": passed,
            "checks": outcome.checks,
        }),
    )
}

pub fn manifest(
    cfg: &ResolvedConfig,
    mode: Mode,
    outcome: &Outcome,
    files: &[Artifact],
) -> Artifact {
    let files: Vec<_> = files
        .iter()
        .map(|a| json!({"name": a.name, "bytes": a.bytes.len(), "sha256": sha256_hex(&a.bytes)}))
        .collect();
    let indices = outcome
        .indices
        .map(|(start, end)| json!({"start": start, "end": end}));
    Artifact::json(
        "manifest.json",
        &json!({
            "tool": "folner-lab",
            "version": env!("CARGO_PKG_VERSION"),
            "scenario": cfg.scenario,
            "mode": mode,
            "config_hash": cfg.hash(),
            "config": cfg.canonical(),
            "indices": indices,
            "files": files,
        }),
    )
}

/// Writes the artifacts, `summary.json` and `manifest.json` under `dir`.
/// Returns the written paths in order.
pub fn write_run(
    dir: &Path,
    cfg: &ResolvedConfig,
    mode: Mode,
    outcome: &Outcome,
    passed: bool,
) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut files = outcome.artifacts.clone();
    files.push(summary(cfg, mode, outcome, passed));
    let man = manifest(cfg, mode, outcome, &files);
    files.push(man);
    let mut written = Vec::with_capacity(files.len());
    for a in &files {
        let path = dir.join(&a.name);
        write_atomic(&path, &a.bytes)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt(), -0.0, 1e-300] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        let a = Artifact::csv("t.csv", &["a", "b"], vec![vec!["1,2".into(), "x".into()]]);
        assert_eq!(String::from_utf8(a.bytes).unwrap(), "a,b\n\"1,2\",x\n");
    }
}
