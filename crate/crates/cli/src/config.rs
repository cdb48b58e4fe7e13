//! Run configuration, grid strings and synthetic-spec strings.

use std::path::PathBuf;

use flnnsc_core::data::{Nonlinearity, SyntheticSpec};
use flnnsc_core::graph::{WeightKind, DEFAULT_K};
use flnnsc_core::models::{CcscConfig, FlnnscConfig};
use flnnsc_core::spectral::{AffinityKind, DEFAULT_GAMMA};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Flnnsc,
    Ccsc,
    Lsr,
    #[value(name = "smr_linear", alias = "smr-linear")]
    SmrLinear,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Flnnsc => "flnnsc",
            Method::Ccsc => "ccsc",
            Method::Lsr => "lsr",
            Method::SmrLinear => "smr_linear",
        }
    }

    /// Methods that learn a network and record a trace.
    pub fn is_iterative(self) -> bool {
        matches!(self, Method::Flnnsc | Method::Ccsc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Weights {
    Binary,
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Affinity {
    Symabs,
    Grouping,
}

/// Serializable mirror of [`SyntheticSpec`]; `warp = 0` means linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticArgs {
    pub clusters: usize,
    pub points_per_cluster: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub warp: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticArgs {
    fn default() -> Self {
        SyntheticSpec::default().into()
    }
}

impl From<SyntheticSpec> for SyntheticArgs {
    fn from(s: SyntheticSpec) -> Self {
        SyntheticArgs {
            clusters: s.clusters,
            points_per_cluster: s.points_per_cluster,
            ambient_dim: s.ambient_dim,
            subspace_dim: s.subspace_dim,
            warp: match s.nonlinearity {
                Nonlinearity::None => 0.0,
                Nonlinearity::TrigWarp(w) => w,
            },
            noise: s.noise_sigma,
            seed: s.seed,
        }
    }
}

impl SyntheticArgs {
    pub fn spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            clusters: self.clusters,
            points_per_cluster: self.points_per_cluster,
            ambient_dim: self.ambient_dim,
            subspace_dim: self.subspace_dim,
            nonlinearity: if self.warp == 0.0 {
                Nonlinearity::None
            } else {
                Nonlinearity::TrigWarp(self.warp)
            },
            noise_sigma: self.noise,
            seed: self.seed,
        }
    }

    /// Parses `default` or a comma list of `key=value` overrides, e.g.
    /// `k=3,ppc=50,ambient=10,sub=2,warp=0.5,noise=0.01,seed=0`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let mut out = SyntheticArgs::default();
        let s = s.trim();
        if s.is_empty() || s == "default" {
            return Ok(out);
        }
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("synthetic: expected key=value, got {part:?}")))?;
            let bad = || CliError::config(format!("synthetic: bad value {value:?} for {key}"));
            let int = || value.trim().parse::<usize>().map_err(|_| bad());
            let float = || value.trim().parse::<f64>().map_err(|_| bad());
            match key.trim() {
                "k" | "clusters" => out.clusters = int()?,
                "ppc" | "points" => out.points_per_cluster = int()?,
                "ambient" => out.ambient_dim = int()?,
                "sub" | "subspace" => out.subspace_dim = int()?,
                "warp" => out.warp = float()?,
                "noise" => out.noise = float()?,
                "seed" => out.seed = value.trim().parse().map_err(|_| bad())?,
                other => return Err(CliError::config(format!("synthetic: unknown key {other:?}"))),
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        header: bool,
        labeled: bool,
    },
    Synthetic(SyntheticArgs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub data: DataSource,
    /// Grouping-effect weight; the ridge weight for `lsr`.
    pub alpha: f64,
    pub beta: f64,
    /// CCSC combination weight; only valid for `ccsc`.
    pub lambda: Option<f64>,
    pub mu: f64,
    pub knn: usize,
    pub weights: Weights,
    pub affinity: Affinity,
    pub gamma: f64,
    /// Defaults to the number of ground-truth classes.
    pub clusters: Option<usize>,
    pub pca_dim: Option<usize>,
    pub seed: u64,
    #[serde(with = "float_or_inf")]
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let base = FlnnscConfig::default();
        RunConfig {
            method: Method::Flnnsc,
            data: DataSource::Synthetic(SyntheticArgs::default()),
            alpha: base.alpha,
            beta: base.beta,
            lambda: None,
            mu: base.mu,
            knn: DEFAULT_K,
            weights: Weights::Binary,
            affinity: Affinity::Grouping,
            gamma: DEFAULT_GAMMA,
            clusters: None,
            pca_dim: None,
            seed: 0,
            tol: base.tol,
            max_iters: base.max_outer_iters,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match (self.method, self.lambda) {
            (Method::Ccsc, None) => return Err(CliError::config("ccsc needs --lambda")),
            (Method::Ccsc, Some(l)) if !(0.0..=1.0).contains(&l) => {
                return Err(CliError::config(format!("lambda must lie in [0, 1], got {l}")))
            }
            (m, Some(_)) if m != Method::Ccsc => {
                return Err(CliError::config(format!("--lambda applies to ccsc only, not {}", m.name())))
            }
            _ => {}
        }
        if let Some(k) = self.clusters {
            if k < 2 {
                return Err(CliError::config(format!("--clusters must be >= 2, got {k}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("mu", self.mu)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CliError::config(format!("--{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.method == Method::Lsr && self.alpha <= 0.0 {
            return Err(CliError::config("lsr needs --alpha > 0 (ridge weight)"));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::config(format!("--tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(CliError::config("--max-iters must be >= 1"));
        }
        if self.knn == 0 {
            return Err(CliError::config("--knn must be >= 1"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CliError::config(format!("--gamma must be > 0, got {}", self.gamma)));
        }
        if self.pca_dim == Some(0) {
            return Err(CliError::config("--pca-dim must be >= 1"));
        }
        Ok(())
    }

    pub fn flnnsc_config(&self) -> FlnnscConfig {
        FlnnscConfig {
            alpha: self.alpha,
            beta: self.beta,
            mu: self.mu,
            max_outer_iters: self.max_iters,
            tol: self.tol,
            seed: self.seed,
            ..FlnnscConfig::default()
        }
    }

    pub fn ccsc_config(&self) -> CcscConfig {
        CcscConfig {
            base: self.flnnsc_config(),
            lambda: self.lambda.unwrap_or(1.0),
        }
    }

    pub fn weight_kind(&self) -> WeightKind {
        match self.weights {
            Weights::Binary => WeightKind::Binary,
            Weights::Heat => WeightKind::HeatKernel { sigma: None },
        }
    }

    pub fn affinity_kind(&self) -> AffinityKind {
        match self.affinity {
            Affinity::Symabs => AffinityKind::SymAbs,
            Affinity::Grouping => AffinityKind::GroupingEffect { gamma: self.gamma },
        }
    }
}

/// Parses a grid given as `a,b,c` or `logspace:lo:hi:steps` (base-10
/// exponents, endpoints included).
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let s = s.trim();
    let bad = || CliError::config(format!("bad grid {s:?}"));
    let values: Vec<f64> = if let Some(rest) = s.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let steps: usize = parts[2].parse().map_err(|_| bad())?;
        match steps {
            0 => return Err(bad()),
            1 => vec![10f64.powf(lo)],
            _ => (0..steps)
                .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (steps - 1) as f64))
                .collect(),
        }
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    Ok(values)
}

/// Lets `tol = inf` survive JSON.
mod float_or_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
