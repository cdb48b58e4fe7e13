//! Fit-time measurements.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{DataSource, Method, RunConfig};
use crate::error::CliError;
use crate::pipeline::Experiment;
use crate::report::{write_atomic, write_json};

pub const BENCH_RUNS: usize = 3;
pub const TIMED_REGION: &str =
    "representation fit only; excludes IO, scaling, PCA, graph construction, affinity, clustering and metrics";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub n: usize,
    pub clusters: usize,
    pub median_seconds: f64,
    pub runs: Vec<f64>,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

/// Median-of-3 fit time per (method, size). Sizes are total sample counts
/// for synthetic data and are ignored for CSV data.
pub fn bench_time(base: &RunConfig, methods: &[Method], sizes: &[usize]) -> Result<Vec<BenchRow>, CliError> {
    if methods.is_empty() {
        return Err(CliError::config("bench needs at least one method"));
    }
    let sources: Vec<DataSource> = match (&base.data, sizes.is_empty()) {
        (DataSource::Synthetic(s), false) => sizes
            .iter()
            .map(|&n| {
                let mut s = *s;
                s.points_per_cluster = (n as f64 / s.clusters as f64).round().max(1.0) as usize;
                DataSource::Synthetic(s)
            })
            .collect(),
        (src, _) => vec![src.clone()],
    };
    let mut rows = Vec::new();
    for data in &sources {
        let prep_cfg = RunConfig {
            data: data.clone(),
            method: Method::Lsr,
            alpha: base.alpha.max(f64::MIN_POSITIVE),
            lambda: None,
            ..base.clone()
        };
        let exp = Experiment::prepare(&prep_cfg)?;
        for &method in methods {
            let cfg = RunConfig {
                method,
                data: data.clone(),
                lambda: if method == Method::Ccsc { base.lambda } else { None },
                ..base.clone()
            };
            cfg.validate()?;
            let mut runs = Vec::with_capacity(BENCH_RUNS);
            for _ in 0..BENCH_RUNS {
                let started = Instant::now();
                exp.fit(&cfg)?;
                runs.push(started.elapsed().as_secs_f64());
            }
            rows.push(BenchRow {
                method,
                n: exp.data.n(),
                clusters: exp.clusters,
                median_seconds: median(&runs),
                runs,
            });
        }
    }
    Ok(rows)
}

pub fn write_bench(dir: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut out = String::from("method,n,clusters,median_seconds");
    for i in 0..BENCH_RUNS {
        out.push_str(&format!(",run{}", i + 1));
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{:e}", r.method.name(), r.n, r.clusters, r.median_seconds));
        for t in &r.runs {
            out.push_str(&format!(",{t:e}"));
        }
        out.push('\n');
    }
    write_atomic(&dir.join("bench.csv"), out.as_bytes())?;
    write_json(
        &dir.join("bench_meta.json"),
        &serde_json::json!({ "timed_region": TIMED_REGION, "runs_per_point": BENCH_RUNS, "statistic": "median" }),
    )
}
