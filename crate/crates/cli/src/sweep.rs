//! Repeated runs and parameter grids.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Method, RunConfig};
use crate::error::CliError;
use crate::pipeline::Experiment;
use crate::report::{write_atomic, write_json, MetricsRecord};

pub const DEFAULT_REPEATS: usize = 20;
pub const SWEEP_HEADER: &str = "alpha,beta,lambda,ca,nmi,ari,f1,ca_std,seconds,best,error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub metrics: Option<MetricsRecord>,
    /// Outer iterations, for iterative methods.
    pub iterations: Option<usize>,
    pub final_z_delta: Option<f64>,
    pub fit_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub config: RunConfig,
    pub repeats: usize,
    pub runs: Vec<RunSummary>,
    pub mean: Option<MetricsRecord>,
    /// Population standard deviation over the runs.
    pub std: Option<MetricsRecord>,
    pub seconds: f64,
}

/// Mean and population standard deviation per metric.
pub fn mean_std(values: &[MetricsRecord]) -> Option<(MetricsRecord, MetricsRecord)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mut mean = [0.0; 4];
    for v in values {
        for (m, x) in mean.iter_mut().zip(v.as_array()) {
            *m += x / n;
        }
    }
    let mut var = [0.0; 4];
    for v in values {
        for ((s, x), m) in var.iter_mut().zip(v.as_array()).zip(mean) {
            *s += (x - m) * (x - m) / n;
        }
    }
    Some((
        MetricsRecord::from_array(mean),
        MetricsRecord::from_array(var.map(f64::sqrt)),
    ))
}

/// Runs `times` seeds `cfg.seed + i` on the same prepared data.
pub fn run_repeated(exp: &Experiment, cfg: &RunConfig, times: usize) -> Result<AggregateReport, CliError> {
    if times == 0 {
        return Err(CliError::config("--repeats must be >= 1"));
    }
    let started = Instant::now();
    let mut runs = Vec::with_capacity(times);
    for i in 0..times {
        let run_cfg = RunConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..cfg.clone()
        };
        let out = exp.run(&run_cfg)?;
        runs.push(RunSummary {
            seed: run_cfg.seed,
            metrics: out.report.metrics,
            iterations: out.trace.as_ref().map(|t| t.iterations()),
            final_z_delta: out.trace.as_ref().and_then(|t| t.z_delta_per_iter.last().copied()),
            fit_seconds: out.report.fit_seconds,
        });
    }
    let metrics: Vec<MetricsRecord> = runs.iter().filter_map(|r| r.metrics).collect();
    let stats = if metrics.len() == runs.len() {
        mean_std(&metrics)
    } else {
        None
    };
    Ok(AggregateReport {
        config: cfg.clone(),
        repeats: times,
        runs,
        mean: stats.map(|s| s.0),
        std: stats.map(|s| s.1),
        seconds: started.elapsed().as_secs_f64(),
    })
}

pub fn write_aggregate(dir: &Path, agg: &AggregateReport) -> Result<(), CliError> {
    write_json(&dir.join("aggregate.json"), agg)?;
    let mut out = String::from("seed,ca,nmi,ari,f1,iterations,final_z_delta,fit_seconds\n");
    for r in &agg.runs {
        let m = r.metrics.map(|m| m.as_array().map(|v| format!("{v:e}")).join(","));
        out.push_str(&format!(
            "{},{},{},{},{:e}\n",
            r.seed,
            m.unwrap_or_else(|| ",,,".into()),
            r.iterations.map(|v| v.to_string()).unwrap_or_default(),
            r.final_z_delta.map(|v| format!("{v:e}")).unwrap_or_default(),
            r.fit_seconds
        ));
    }
    write_atomic(&dir.join("runs.csv"), out.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: Option<f64>,
    pub mean: Option<MetricsRecord>,
    pub ca_std: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Row with the highest mean CA (first on ties).
    pub best: Option<usize>,
}

impl SweepTable {
    pub fn best_row(&self) -> Option<&SweepRow> {
        self.best.map(|i| &self.rows[i])
    }
}

pub struct SweepGrids {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Only for ccsc.
    pub lambda: Option<Vec<f64>>,
}

/// One [`run_repeated`] per grid point. Failing points become rows with an
/// error message and the sweep continues. With `jobs > 1` points run on a
/// thread pool; with `points_dir` each point's aggregate is written there
/// as soon as it finishes.
pub fn grid_sweep(
    exp: &Experiment,
    base: &RunConfig,
    grids: &SweepGrids,
    times: usize,
    jobs: usize,
    points_dir: Option<&Path>,
) -> Result<SweepTable, CliError> {
    if grids.alpha.is_empty() || grids.beta.is_empty() || grids.lambda.as_ref().is_some_and(Vec::is_empty) {
        return Err(CliError::config("grids must be non-empty"));
    }
    if grids.lambda.is_some() && base.method != Method::Ccsc {
        return Err(CliError::config("a lambda grid applies to ccsc only"));
    }
    if times == 0 {
        return Err(CliError::config("--repeats must be >= 1"));
    }
    let lambdas: Vec<Option<f64>> = match &grids.lambda {
        Some(l) => l.iter().map(|&v| Some(v)).collect(),
        None => vec![base.lambda],
    };
    let mut points = Vec::new();
    for &alpha in &grids.alpha {
        for &beta in &grids.beta {
            for &lambda in &lambdas {
                points.push(RunConfig {
                    alpha,
                    beta,
                    lambda,
                    ..base.clone()
                });
            }
        }
    }

    let eval = |(idx, cfg): (usize, &RunConfig)| -> Result<SweepRow, CliError> {
        let started = Instant::now();
        let result = run_repeated(exp, cfg, times);
        let seconds = started.elapsed().as_secs_f64();
        if let (Some(dir), Ok(agg)) = (points_dir, &result) {
            write_json(&dir.join(format!("point_{idx:04}.json")), agg)?;
        }
        Ok(match result {
            Ok(agg) => SweepRow {
                alpha: cfg.alpha,
                beta: cfg.beta,
                lambda: cfg.lambda,
                mean: agg.mean,
                ca_std: agg.std.map(|s| s.ca),
                seconds,
                error: None,
            },
            Err(e) => {
                log::warn!("grid point alpha={} beta={} failed: {e}", cfg.alpha, cfg.beta);
                SweepRow {
                    alpha: cfg.alpha,
                    beta: cfg.beta,
                    lambda: cfg.lambda,
                    mean: None,
                    ca_std: None,
                    seconds,
                    error: Some(e.to_string()),
                }
            }
        })
    };

    let rows: Vec<SweepRow> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
        pool.install(|| points.par_iter().enumerate().map(eval).collect::<Result<_, _>>())?
    } else {
        points.iter().enumerate().map(eval).collect::<Result<_, _>>()?
    };

    let mut best: Option<usize> = None;
    for (i, r) in rows.iter().enumerate() {
        if let Some(m) = r.mean {
            if best.map_or(true, |b| m.ca > rows[b].mean.map_or(f64::NEG_INFINITY, |bm| bm.ca)) {
                best = Some(i);
            }
        }
    }
    Ok(SweepTable { rows, best })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_sweep_csv(path: &Path, table: &SweepTable) -> Result<(), CliError> {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for (i, r) in table.rows.iter().enumerate() {
        let m = r.mean.map(|m| m.as_array());
        out.push_str(&format!(
            "{:e},{:e},{},{},{},{},{},{},{:e},{},{}\n",
            r.alpha,
            r.beta,
            opt(r.lambda),
            opt(m.map(|m| m[0])),
            opt(m.map(|m| m[1])),
            opt(m.map(|m| m[2])),
            opt(m.map(|m| m[3])),
            opt(r.ca_std),
            r.seconds,
            u8::from(table.best == Some(i)),
            r.error.as_deref().unwrap_or("").replace([',', '\n', '\r'], ";"),
        ));
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, msg: String| CliError::Format {
        path: path.to_path_buf(),
        message: format!("line {line}: {msg}"),
    };
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_HEADER) {
        return Err(bad(1, "unexpected header".into()));
    }
    let mut rows = Vec::new();
    let mut best = None;
    for (idx, line) in lines.enumerate() {
        let f: Vec<&str> = line.splitn(11, ',').collect();
        if f.len() != 11 {
            return Err(bad(idx + 2, format!("expected 11 fields, got {}", f.len())));
        }
        let num = |s: &str| -> Result<Option<f64>, CliError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(idx + 2, format!("bad number {s:?}")))
            }
        };
        let req = |s: &str| num(s)?.ok_or_else(|| bad(idx + 2, "missing value".into()));
        let metrics = match (num(f[3])?, num(f[4])?, num(f[5])?, num(f[6])?) {
            (Some(ca), Some(nmi), Some(ari), Some(f1)) => Some(MetricsRecord { ca, nmi, ari, f1 }),
            _ => None,
        };
        if f[9] == "1" {
            best = Some(rows.len());
        }
        rows.push(SweepRow {
            alpha: req(f[0])?,
            beta: req(f[1])?,
            lambda: num(f[2])?,
            mean: metrics,
            ca_std: num(f[7])?,
            seconds: req(f[8])?,
            error: (!f[10].is_empty()).then(|| f[10].to_string()),
        });
    }
    Ok(SweepTable { rows, best })
}
