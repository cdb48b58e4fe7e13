//! Dataset loading, preprocessing and synthetic union-of-subspaces data.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, svd_thin, Matrix};

/// d×n, samples as columns.
pub type DataMatrix = Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub name: String,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn dim(&self) -> usize {
        self.x.rows()
    }

    /// Number of distinct ground-truth labels, if labels are present.
    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut u = l.clone();
            u.sort_unstable();
            u.dedup();
            u.len()
        })
    }
}

/// Reads one sample per line. With `has_label`, the last field is an
/// integer class id. With `has_header`, the first line is skipped.
pub fn load_csv(path: &Path, has_label: bool, has_header: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if has_header && idx == 0 {
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(parse_err(
                    line_no,
                    format!("expected {w} fields, found {}", fields.len()),
                ))
            }
            _ => {}
        }
        let (feats, label) = if has_label {
            let (last, rest) = fields.split_last().expect("non-empty line");
            let l = last
                .parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("label {last:?} is not a non-negative integer")))?;
            (rest, Some(l))
        } else {
            (&fields[..], None)
        };
        if feats.is_empty() {
            return Err(parse_err(line_no, "no feature columns".into()));
        }
        let mut col = Vec::with_capacity(feats.len());
        for f in feats {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(line_no, format!("{f:?} is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value {f:?}")));
            }
            col.push(v);
        }
        columns.push(col);
        labels.extend(label);
    }
    if columns.is_empty() {
        return Err(parse_err(1, "no samples".into()));
    }
    let x = Matrix::from_columns(&columns)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset {
        x,
        labels: has_label.then_some(labels),
        name,
    })
}

/// Writes samples as rows with 17 significant digits, labels last if present.
pub fn save_csv(path: &Path, data: &Dataset) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = String::new();
    for j in 0..data.n() {
        let mut fields: Vec<String> = data.x.col(j).iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(l) = &data.labels {
            fields.push(l[j].to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(out.as_bytes()).map_err(io_err)
}

/// Per-feature affine map onto [−1, 1]; constant features become 0.
pub fn scale_to_unit(x: &DataMatrix) -> DataMatrix {
    let (d, n) = x.shape();
    let mut out = x.clone();
    for i in 0..d {
        let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
            (lo.min(x[(i, j)]), hi.max(x[(i, j)]))
        });
        for j in 0..n {
            out[(i, j)] = if hi > lo {
                (2.0 * (x[(i, j)] - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
            } else {
                0.0
            };
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Pca {
    /// target_dim×n projected data.
    pub x: DataMatrix,
    /// Fraction of total centered variance kept.
    pub preserved_variance: f64,
}

/// Centered projection onto the top principal directions (no whitening).
pub fn pca_reduce(x: &DataMatrix, target_dim: usize) -> Result<Pca> {
    let (d, n) = x.shape();
    if target_dim == 0 || target_dim > d.min(n) {
        return Err(Error::invalid(
            "pca dimension",
            format!("need 1 <= target <= min(d, n) = {}, got {target_dim}", d.min(n)),
        ));
    }
    let mut xc = x.clone();
    for i in 0..d {
        let mean = (0..n).map(|j| x[(i, j)]).sum::<f64>() / n as f64;
        for j in 0..n {
            xc[(i, j)] -= mean;
        }
    }
    let svd = svd_thin(&xc)?;
    let total: f64 = svd.s.iter().map(|s| s * s).sum();
    let kept: f64 = svd.s[..target_dim].iter().map(|s| s * s).sum();
    let proj = Matrix::from_fn(target_dim, n, |r, j| dot(svd.u.col(r), xc.col(j)));
    Ok(Pca {
        x: proj,
        preserved_variance: if total > 0.0 { kept / total } else { 1.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    None,
    /// `x ← x + strength · sin(πx)` elementwise.
    TrigWarp(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub clusters: usize,
    pub points_per_cluster: usize,
    pub ambient_dim: usize,
    pub subspace_dim: usize,
    pub nonlinearity: Nonlinearity,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            clusters: 3,
            points_per_cluster: 50,
            ambient_dim: 10,
            subspace_dim: 2,
            nonlinearity: Nonlinearity::TrigWarp(0.5),
            noise_sigma: 0.01,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 || self.points_per_cluster == 0 {
            return Err(Error::invalid("synthetic spec", "need at least one cluster and one point"));
        }
        if self.subspace_dim == 0 || self.subspace_dim >= self.ambient_dim {
            return Err(Error::invalid(
                "subspace_dim",
                format!("need 1 <= subspace_dim < ambient_dim = {}", self.ambient_dim),
            ));
        }
        if let Nonlinearity::TrigWarp(s) = self.nonlinearity {
            if !s.is_finite() {
                return Err(Error::invalid("strength", "must be finite"));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Random orthonormal columns via Gram–Schmidt on Gaussian draws.
fn random_basis(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut b = Matrix::zeros(rows, cols);
    let mut j = 0;
    while j < cols {
        let mut v: Vec<f64> = (0..rows).map(|_| rng.sample(StandardNormal)).collect();
        for p in 0..j {
            let ip = dot(b.col(p), &v);
            for (vi, bi) in v.iter_mut().zip(b.col(p)) {
                *vi -= ip * bi;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            b.set_col(j, &v.iter().map(|x| x / norm).collect::<Vec<_>>());
            j += 1;
        }
    }
    b
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.clusters * spec.points_per_cluster;
    let mut x = Matrix::zeros(spec.ambient_dim, n);
    let mut labels = Vec::with_capacity(n);
    let strength = match spec.nonlinearity {
        Nonlinearity::TrigWarp(s) if s != 0.0 => Some(s),
        _ => None,
    };
    for c in 0..spec.clusters {
        let basis = random_basis(spec.ambient_dim, spec.subspace_dim, &mut rng);
        for p in 0..spec.points_per_cluster {
            let coef: Vec<f64> = (0..spec.subspace_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mut point = basis.mul_vec(&coef)?;
            if let Some(s) = strength {
                point.iter_mut().for_each(|v| *v += s * (std::f64::consts::PI * *v).sin());
            }
            if spec.noise_sigma > 0.0 {
                for v in point.iter_mut() {
                    let e: f64 = rng.sample(StandardNormal);
                    *v += spec.noise_sigma * e;
                }
            }
            x.set_col(c * spec.points_per_cluster + p, &point);
            labels.push(c);
        }
    }
    Ok(Dataset {
        x,
        labels: Some(labels),
        name: "synthetic".into(),
    })
}
