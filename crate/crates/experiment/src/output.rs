//! CSV and manifest writers, plus the manifest reader used for replays.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nhbraid::evolution::FidelitySeries;
use serde::{Deserialize, Serialize};

use crate::config::{ResolvedConfig, ScenarioName};
use crate::error::{ExperimentError, Result};
use crate::scenario::{aggregate, ResultRow, RunOutput};

pub const SUMMARY_HEADER: &str =
    "scenario,sweep_value,realization,final_f_target,final_f_self,final_loss,gate_distance,leakage";
pub const SERIES_HEADER: &str = "time,f_self,f_target,f_defect";
pub const AGGREGATE_HEADER: &str = "scenario,sweep_value,realizations,mean_loss,stderr_loss,mean_gate_distance";

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub code_version: String,
    pub scenario: ScenarioName,
    pub config: BTreeMap<String, String>,
    pub calibration_factor: f64,
    pub seed: u64,
    pub realizations: usize,
    pub rows: usize,
    pub leakage_breaches: usize,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| ExperimentError::Manifest(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// The configuration recorded in the manifest, revalidated.
    pub fn resolved_config(&self) -> Result<ResolvedConfig> {
        ResolvedConfig::from_values(self.scenario, self.config.clone())
    }
}

pub fn summary_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.scenario,
            r.sweep_value,
            r.realization,
            r.final_f_target,
            r.final_f_self,
            r.final_loss,
            r.gate_distance,
            r.leakage
        );
    }
    s
}

pub fn series_csv(series: &FidelitySeries) -> String {
    let mut s = String::from(SERIES_HEADER);
    s.push('\n');
    for k in 0..series.times.len() {
        let _ = writeln!(s, "{},{},{},{}", series.times[k], series.f_self[k], series.f_target[k], series.f_defect[k]);
    }
    s
}

pub fn aggregate_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for a in aggregate(rows) {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            a.scenario, a.sweep_value, a.realizations, a.mean_loss, a.stderr_loss, a.mean_gate_distance
        );
    }
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

/// Writes `summary.csv`, `aggregate.csv`, one `series_<tag>.csv` per series
/// and `run.json` into `dir`, creating it if needed.
pub fn write_results(out: &RunOutput, cfg: &ResolvedConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let mut files = vec![
        write(dir, "summary.csv", &summary_csv(&out.rows))?,
        write(dir, "aggregate.csv", &aggregate_csv(&out.rows))?,
    ];
    for s in &out.series {
        files.push(write(dir, &format!("series_{}.csv", s.tag), &series_csv(&s.series))?);
    }
    let names = files.iter().map(|p| p.file_name().expect("file name").to_string_lossy().into_owned()).collect();
    let manifest = Manifest {
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario: cfg.scenario,
        config: cfg.values.clone(),
        calibration_factor: out.calibration_factor,
        seed: cfg.get("errors.seed").parse().unwrap_or_default(),
        realizations: cfg.get("ensemble.realizations").parse().unwrap_or_default(),
        rows: out.rows.len(),
        leakage_breaches: out.leakage_breaches,
        files: names,
    };
    files.push(write(dir, "run.json", &manifest.to_json())?);
    Ok(files)
}
