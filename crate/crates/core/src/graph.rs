//! k-nearest-neighbor similarity graphs and their Laplacians.
//!
//! `S` is built over the columns of `X`; `L = D - S` with `D_ii = Σ_j S_ij`
//! drives the grouping-effect penalty `Tr(Z L Zᵀ)`.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_K: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    /// 0-1 weights on k-nn edges.
    Binary,
    /// `exp(-‖x_i - x_j‖² / (2σ²))` on k-nn edges. `None` picks σ as the
    /// median k-nn distance.
    HeatKernel { sigma: Option<f64> },
}

impl Default for WeightKind {
    fn default() -> Self {
        WeightKind::Binary
    }
}

#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    /// Symmetric, non-negative, zero diagonal.
    pub s: Matrix,
    /// Weighting actually used; heat-kernel σ is always resolved here.
    pub weight_kind: WeightKind,
    pub k: usize,
}

#[derive(Debug, Clone)]
pub struct Laplacian {
    pub l: Matrix,
}

impl Laplacian {
    pub fn n(&self) -> usize {
        self.l.rows()
    }

    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let lx = self.l.mul_vec(x).expect("length checked by caller");
        lx.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Indices of the `k` nearest columns of `x` to column `i` (excluding `i`),
/// ordered by distance then by index.
pub fn nearest_neighbors(x: &Matrix, i: usize, k: usize) -> Vec<(usize, f64)> {
    let xi = x.col(i);
    let mut cand: Vec<(usize, f64)> = (0..x.cols())
        .filter(|&j| j != i)
        .map(|j| {
            let d2: f64 = xi.iter().zip(x.col(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            (j, d2)
        })
        .collect();
    cand.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    cand.truncate(k);
    cand
}

/// Mutual-OR k-nn graph over the columns of `x`.
pub fn knn_similarity(x: &Matrix, k: usize, weight_kind: WeightKind) -> Result<SimilarityGraph> {
    let n = x.cols();
    if k == 0 || k >= n {
        return Err(Error::invalid("k", format!("need 1 <= k < n, got k={k}, n={n}")));
    }
    if let WeightKind::HeatKernel { sigma: Some(s) } = weight_kind {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be positive, got {s}")));
        }
    }

    let neighbors: Vec<Vec<(usize, f64)>> = (0..n).map(|i| nearest_neighbors(x, i, k)).collect();

    let weight_kind = match weight_kind {
        WeightKind::HeatKernel { sigma: None } => {
            let mut dists: Vec<f64> = neighbors
                .iter()
                .flat_map(|nb| nb.iter().map(|&(_, d2)| d2.sqrt()))
                .collect();
            dists.sort_by(f64::total_cmp);
            let mut sigma = median_sorted(&dists);
            if sigma <= 0.0 {
                let positive: Vec<f64> = dists.iter().copied().filter(|&d| d > 0.0).collect();
                sigma = if positive.is_empty() { 1.0 } else { median_sorted(&positive) };
            }
            WeightKind::HeatKernel { sigma: Some(sigma) }
        }
        other => other,
    };

    let weight = |d2: f64| match weight_kind {
        WeightKind::Binary => 1.0,
        WeightKind::HeatKernel { sigma } => {
            let s = sigma.expect("resolved above");
            (-d2 / (2.0 * s * s)).exp()
        }
    };

    let mut s = Matrix::zeros(n, n);
    for (i, nb) in neighbors.iter().enumerate() {
        for &(j, d2) in nb {
            let w = weight(d2);
            if w > s[(i, j)] {
                s[(i, j)] = w;
                s[(j, i)] = w;
            }
        }
    }
    Ok(SimilarityGraph { s, weight_kind, k })
}

fn median_sorted(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        n if n % 2 == 1 => v[n / 2],
        n => 0.5 * (v[n / 2 - 1] + v[n / 2]),
    }
}

/// `L = D - S`.
pub fn laplacian(g: &SimilarityGraph) -> Laplacian {
    let n = g.s.rows();
    let mut l = g.s.scale(-1.0);
    for i in 0..n {
        let deg: f64 = (0..n).filter(|&j| j != i).map(|j| g.s[(i, j)]).sum();
        l[(i, i)] = deg;
    }
    Laplacian { l }
}
