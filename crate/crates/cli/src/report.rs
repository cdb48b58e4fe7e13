//! Report types and their JSON / CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use flnnsc_core::metrics::Scores;
use flnnsc_core::models::SolveTrace;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const REPORT_FILE: &str = "report.json";
pub const TRACE_FILE: &str = "trace.csv";
const TRACE_HEADER: &str = "iteration,objective,z_delta,seconds,z_residual,partial_before,partial_after";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub ca: f64,
    pub nmi: f64,
    pub ari: f64,
    pub f1: f64,
}

impl From<Scores> for MetricsRecord {
    fn from(s: Scores) -> Self {
        MetricsRecord {
            ca: s.ca,
            nmi: s.nmi,
            ari: s.ari,
            f1: s.f1,
        }
    }
}

impl MetricsRecord {
    pub fn as_array(&self) -> [f64; 4] {
        [self.ca, self.nmi, self.ari, self.f1]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        MetricsRecord {
            ca: v[0],
            nmi: v[1],
            ari: v[2],
            f1: v[3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub objective: Vec<f64>,
    pub z_delta: Vec<f64>,
    pub seconds: Vec<f64>,
    pub z_residual: Vec<f64>,
    pub partial_before: Vec<f64>,
    pub partial_after: Vec<f64>,
}

impl From<&SolveTrace> for TraceRecord {
    fn from(t: &SolveTrace) -> Self {
        TraceRecord {
            objective: t.objective_per_iter.clone(),
            z_delta: t.z_delta_per_iter.clone(),
            seconds: t.wall_clock_per_iter.clone(),
            z_residual: t.z_residual_per_iter.clone(),
            partial_before: t.partial_before_per_iter.clone(),
            partial_after: t.partial_after_per_iter.clone(),
        }
    }
}

impl TraceRecord {
    pub fn len(&self) -> usize {
        self.z_delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_delta.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub dataset: String,
    pub n: usize,
    pub dim: usize,
    pub clusters: usize,
    pub preserved_variance: Option<f64>,
    /// Present when the data carries ground truth.
    pub metrics: Option<MetricsRecord>,
    pub predicted: Vec<usize>,
    pub truth: Option<Vec<usize>>,
    pub trace: Option<TraceRecord>,
    /// Representation learning only.
    pub fit_seconds: f64,
    /// Preparation plus the run itself.
    pub total_seconds: f64,
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_report(path: &Path) -> Result<RunReport, CliError> {
    read_json(path)
}

pub fn write_trace_csv(path: &Path, trace: &TraceRecord) -> Result<(), CliError> {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.len() {
        out.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            i + 1,
            trace.objective[i],
            trace.z_delta[i],
            trace.seconds[i],
            trace.z_residual[i],
            trace.partial_before[i],
            trace.partial_after[i],
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_trace_csv(path: &Path) -> Result<TraceRecord, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, msg: &str| CliError::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines();
    if lines.next() != Some(TRACE_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    let mut t = TraceRecord {
        objective: vec![],
        z_delta: vec![],
        seconds: vec![],
        z_residual: vec![],
        partial_before: vec![],
        partial_after: vec![],
    };
    for (idx, line) in lines.enumerate() {
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad(idx + 2, "non-numeric field"))?;
        if v.len() != 7 {
            return Err(bad(idx + 2, "expected 7 fields"));
        }
        t.objective.push(v[1]);
        t.z_delta.push(v[2]);
        t.seconds.push(v[3]);
        t.z_residual.push(v[4]);
        t.partial_before.push(v[5]);
        t.partial_after.push(v[6]);
    }
    Ok(t)
}

/// Writes `report.json` and, for iterative methods, `trace.csv` into `dir`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<(), CliError> {
    write_json(&dir.join(REPORT_FILE), report)?;
    if let Some(trace) = &report.trace {
        write_trace_csv(&dir.join(TRACE_FILE), trace)?;
    }
    Ok(())
}
