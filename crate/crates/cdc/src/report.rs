//! Scenario execution and the files it writes: `report.json` (deterministic),
//! `metadata.json` (timestamps and environment) and optional `curves.csv`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cdc_core::theorems::Chain;
use serde::Serialize;

use crate::config::{Backend, ScenarioConfig};
use crate::error::CliError;
use crate::runner::{group_curves, markov_curves, run_all, GroupRun, MarkovRun, SuiteOutcome};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const METADATA_FILE: &str = "metadata.json";
pub const CURVES_FILE: &str = "curves.csv";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub config: ScenarioConfig,
    /// Generator fingerprint, or group and length function names.
    pub space: String,
    pub suites: Vec<SuiteOutcome>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Metadata {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub created_unix_seconds: u64,
    pub threads: usize,
}

pub struct Outcome {
    pub report: Report,
    pub curves: Option<(Vec<&'static str>, Vec<Vec<f64>>)>,
}

pub fn execute(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    cfg.check()?;
    let suites = cfg.expanded_suites();
    let grid = cfg.grid.map(|g| g.build()).transpose()?;
    let (space, outcomes, curves) = match cfg.backend {
        Backend::Markov => {
            let spec = cfg.generator.as_ref().expect("checked");
            let chain = Chain::new(spec.build()?)?;
            let run = MarkovRun { chain: &chain, grid, samples: cfg.samples, seed: cfg.seed };
            let outcomes = run_all(&suites, |s| run.run(s))?;
            let curves = cfg.curves.then(|| markov_curves(&chain, grid.unwrap_or_else(|| chain.grid()), cfg.seed));
            (chain.generator.fingerprint(), outcomes, curves)
        }
        Backend::Group => {
            let ms = cfg.group.as_ref().expect("checked").build()?;
            let run = GroupRun { ms: &ms, grid, samples: cfg.samples, seed: cfg.seed };
            let outcomes = run_all(&suites, |s| run.run(s))?;
            let curves = cfg.curves.then(|| group_curves(&ms, grid.unwrap_or_else(|| ms.default_grid()), cfg.seed));
            (format!("{}/{}", ms.group.name(), ms.psi.name), outcomes, curves)
        }
    };
    let passed = outcomes.iter().all(SuiteOutcome::passed);
    let report = Report { schema_version: SCHEMA_VERSION, config: cfg.clone(), space, suites: outcomes, passed };
    Ok(Outcome { report, curves })
}

pub fn report_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Writes the report files into `dir` and returns the report path.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let report_path = dir.join(REPORT_FILE);
    write(&report_path, &report_json(&outcome.report)?)?;
    let meta = Metadata {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        created_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        threads: rayon::current_num_threads(),
    };
    write(&dir.join(METADATA_FILE), &serde_json::to_string_pretty(&meta)?)?;
    if let Some((header, rows)) = &outcome.curves {
        let path = dir.join(CURVES_FILE);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
    }
    Ok(report_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_passes_curvature_trivially() {
        let cfg = ScenarioConfig::from_json(
            r#"{"backend": "markov", "generator": {"type": "explicit", "q": [[0, 0, 0], [0, 0, 0], [0, 0, 0]]}, "suites": ["curvature"]}"#,
        )
        .unwrap();
        let out = execute(&cfg).unwrap();
        assert!(out.report.passed);
        assert_eq!(out.report.suites[0].report["holds"], true);
    }

    #[test]
    fn runs_are_byte_identical() {
        let cfg = ScenarioConfig::from_json(
            r#"{"backend": "markov", "generator": {"type": "cycle", "n": 6}, "suites": ["meyer", "oscillation"], "seed": 7, "samples": 4, "curves": true}"#,
        )
        .unwrap();
        let a = report_json(&execute(&cfg).unwrap().report).unwrap();
        let b = report_json(&execute(&cfg).unwrap().report).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn group_backend_runs() {
        let cfg = ScenarioConfig::from_json(r#"{"backend": "group", "group": {"type": "cyclic", "n": 4, "psi": "word-length"}, "samples": 3}"#).unwrap();
        let out = execute(&cfg).unwrap();
        assert!(out.report.passed, "{}", report_json(&out.report).unwrap());
    }
}
