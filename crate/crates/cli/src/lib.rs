//! Experiment runner for FLNNSC / CCSC subspace clustering.
//!
//! Subcommands: `run` (one seed), `repeat` (seeds `seed..seed+repeats`),
//! `sweep` (grid over α, β and, for ccsc, λ), `affinity` (heatmap export)
//! and `bench` (fit timing). Every file written here can be read back with
//! the loaders in [`report`], [`sweep`] and [`export`].

pub mod bench;
pub mod config;
pub mod error;
pub mod export;
pub mod pipeline;
pub mod report;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_grid, Affinity, DataSource, Method, RunConfig, SyntheticArgs, Weights};
pub use error::CliError;
pub use pipeline::{run_single, Experiment};

pub const THREADS_ENV: &str = "FLNNSC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "flnnsc", version, about = "FLNNSC / CCSC subspace clustering experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One run; writes report.json and trace.csv.
    Run(CommonArgs),
    /// `--repeats` runs with seeds seed, seed+1, ...; writes aggregate.json and runs.csv.
    Repeat(CommonArgs),
    /// Grid sweep; `--alpha`, `--beta` and `--lambda` take grids.
    Sweep(CommonArgs),
    /// One run plus affinity.csv and affinity.pgm.
    Affinity(CommonArgs),
    /// Median-of-3 fit times; writes bench.csv.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Method(s); `bench` accepts a comma list.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "flnnsc")]
    pub method: Vec<Method>,
    /// CSV with one sample per line and an integer label last.
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// `default` or `k=3,ppc=50,ambient=10,sub=2,warp=0.5,noise=0.01,seed=0`.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Value, comma list or logspace:lo:hi:steps. Ridge weight for lsr.
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[arg(long, default_value = "1")]
    pub beta: String,
    /// ccsc only.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long, default_value_t = 1e-2)]
    pub mu: f64,
    #[arg(long, default_value_t = flnnsc_core::graph::DEFAULT_K)]
    pub knn: usize,
    #[arg(long, value_enum, default_value = "binary")]
    pub weights: Weights,
    #[arg(long, value_enum, default_value = "grouping")]
    pub affinity: Affinity,
    #[arg(long, default_value_t = flnnsc_core::spectral::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// Defaults to the number of ground-truth classes.
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub pca_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Stop once ‖Z_k − Z_{k−1}‖²_F <= tol; `inf` stops after one iteration.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = sweep::DEFAULT_REPEATS)]
    pub repeats: usize,
    /// Parallel grid points (capped by FLNNSC_THREADS).
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value = "flnnsc-out")]
    pub out: PathBuf,
    /// Skip the first CSV line.
    #[arg(long)]
    pub header: bool,
    /// The CSV has no label column.
    #[arg(long)]
    pub unlabeled: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Total sample counts for synthetic data, e.g. 100,200,400.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
}

fn single(name: &str, grid: &[f64]) -> Result<f64, CliError> {
    match grid {
        [v] => Ok(*v),
        _ => Err(CliError::config(format!("--{name} takes a single value here; use `sweep` for grids"))),
    }
}

impl CommonArgs {
    pub fn data_source(&self) -> Result<DataSource, CliError> {
        match (&self.data, &self.synthetic) {
            (Some(path), None) => Ok(DataSource::Csv {
                path: path.clone(),
                header: self.header,
                labeled: !self.unlabeled,
            }),
            (None, Some(spec)) => Ok(DataSource::Synthetic(SyntheticArgs::parse(spec)?)),
            (None, None) => Err(CliError::config("pass --data FILE or --synthetic SPEC")),
            (Some(_), Some(_)) => Err(CliError::config("--data and --synthetic are exclusive")),
        }
    }

    pub fn grids(&self) -> Result<sweep::SweepGrids, CliError> {
        Ok(sweep::SweepGrids {
            alpha: parse_grid(&self.alpha)?,
            beta: parse_grid(&self.beta)?,
            lambda: self.lambda.as_deref().map(parse_grid).transpose()?,
        })
    }

    fn method_for(&self, how_many: &str) -> Result<Method, CliError> {
        match self.method.as_slice() {
            [m] => Ok(*m),
            _ => Err(CliError::config(format!("--method takes {how_many}"))),
        }
    }

    /// Config with single α, β, λ values.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let g = self.grids()?;
        let cfg = RunConfig {
            alpha: single("alpha", &g.alpha)?,
            beta: single("beta", &g.beta)?,
            lambda: g.lambda.as_deref().map(|l| single("lambda", l)).transpose()?,
            ..self.base_config(self.method_for("exactly one value")?)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Config whose α, β, λ get replaced per grid point.
    pub fn base_config(&self, method: Method) -> Result<RunConfig, CliError> {
        Ok(RunConfig {
            method,
            data: self.data_source()?,
            alpha: 1.0,
            beta: 1.0,
            lambda: None,
            mu: self.mu,
            knn: self.knn,
            weights: self.weights,
            affinity: self.affinity,
            gamma: self.gamma,
            clusters: self.clusters,
            pca_dim: self.pca_dim,
            seed: self.seed,
            tol: self.tol,
            max_iters: self.max_iters,
        })
    }
}

/// Grid-point parallelism: `--jobs`, capped by `FLNNSC_THREADS` when set.
pub fn effective_jobs(jobs: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v >= 1);
    jobs.max(1).min(cap.unwrap_or(usize::MAX))
}

/// Executes a parsed command and returns a short summary for stdout.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Run(a) => {
            let cfg = a.run_config()?;
            let out = run_single(&cfg)?;
            report::write_run(&a.out, &out.report)?;
            Ok(summary_line(&out.report.metrics, out.report.trace.as_ref().map(|t| t.len()), &a.out))
        }
        Command::Repeat(a) => {
            let cfg = a.run_config()?;
            let exp = Experiment::prepare(&cfg)?;
            let agg = sweep::run_repeated(&exp, &cfg, a.repeats)?;
            sweep::write_aggregate(&a.out, &agg)?;
            Ok(match (agg.mean, agg.std) {
                (Some(m), Some(s)) => format!(
                    "repeats={} ca={:.4}±{:.4} nmi={:.4}±{:.4} ari={:.4}±{:.4} f1={:.4}±{:.4} out={}",
                    agg.repeats, m.ca, s.ca, m.nmi, s.nmi, m.ari, s.ari, m.f1, s.f1,
                    a.out.display()
                ),
                _ => format!("repeats={} (no ground truth) out={}", agg.repeats, a.out.display()),
            })
        }
        Command::Sweep(a) => {
            let method = a.method_for("exactly one value")?;
            let base = a.base_config(method)?;
            let grids = a.grids()?;
            let base = RunConfig {
                lambda: if method == Method::Ccsc && grids.lambda.is_none() {
                    return Err(CliError::config("ccsc sweeps need --lambda"));
                } else {
                    None
                },
                ..base
            };
            let probe = RunConfig {
                alpha: grids.alpha[0],
                beta: grids.beta[0],
                lambda: grids.lambda.as_ref().map(|l| l[0]),
                ..base.clone()
            };
            let exp = Experiment::prepare(&probe)?;
            let table = sweep::grid_sweep(
                &exp,
                &base,
                &grids,
                a.repeats,
                effective_jobs(a.jobs),
                Some(&a.out.join("points")),
            )?;
            sweep::write_sweep_csv(&a.out.join("sweep.csv"), &table)?;
            Ok(match table.best_row() {
                Some(r) => format!(
                    "points={} best alpha={} beta={} lambda={} ca={:.4} out={}",
                    table.rows.len(),
                    r.alpha,
                    r.beta,
                    r.lambda.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
                    r.mean.map_or(f64::NAN, |m| m.ca),
                    a.out.display()
                ),
                None => format!("points={} (no scored point) out={}", table.rows.len(), a.out.display()),
            })
        }
        Command::Affinity(a) => {
            let cfg = a.run_config()?;
            let out = run_single(&cfg)?;
            report::write_run(&a.out, &out.report)?;
            let ex = export::export_affinity(&a.out, &out.affinity.g, out.report.truth.as_deref())?;
            report::write_json(&a.out.join("affinity_meta.json"), &ex)?;
            Ok(format!(
                "off_block_fraction={} all_zero={} out={}",
                ex.off_block_fraction.map_or("-".into(), |v| format!("{v:.4}")),
                ex.all_zero,
                a.out.display()
            ))
        }
        Command::Bench(b) => {
            let a = &b.common;
            let g = a.grids()?;
            let base = RunConfig {
                alpha: single("alpha", &g.alpha)?,
                beta: single("beta", &g.beta)?,
                lambda: g.lambda.as_deref().map(|l| single("lambda", l)).transpose()?,
                ..a.base_config(a.method[0])?
            };
            let rows = bench::bench_time(&base, &a.method, &b.sizes)?;
            bench::write_bench(&a.out, &rows)?;
            let parts: Vec<String> = rows
                .iter()
                .map(|r| format!("{}@n={}:{:.4}s", r.method.name(), r.n, r.median_seconds))
                .collect();
            Ok(format!("{} out={}", parts.join(" "), a.out.display()))
        }
    }
}

fn summary_line(m: &Option<report::MetricsRecord>, iters: Option<usize>, out: &std::path::Path) -> String {
    let it = iters.map(|i| format!(" iterations={i}")).unwrap_or_default();
    match m {
        Some(m) => format!(
            "ca={:.4} nmi={:.4} ari={:.4} f1={:.4}{it} out={}",
            m.ca, m.nmi, m.ari, m.f1,
            out.display()
        ),
        None => format!("(no ground truth){it} out={}", out.display()),
    }
}
