//! External clustering metrics: CA, NMI, ARI and pairwise F1.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Counts of points per (true cluster, predicted cluster). Label ids are
/// compacted in ascending order on each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub n: usize,
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::LengthMismatch {
                left: truth.len(),
                right: pred.len(),
            });
        }
        let ti = compact(truth);
        let pi = compact(pred);
        let kt = ti.iter().max().map_or(0, |m| m + 1);
        let kp = pi.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0; kp]; kt];
        for (&a, &b) in ti.iter().zip(&pi) {
            counts[a][b] += 1;
        }
        Ok(ContingencyTable {
            counts,
            n: truth.len(),
        })
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let kp = self.counts.first().map_or(0, Vec::len);
        (0..kp).map(|j| self.counts.iter().map(|r| r[j]).sum()).collect()
    }
}

fn compact(labels: &[usize]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    for &l in labels {
        ids.entry(l).or_insert(0);
    }
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    labels.iter().map(|l| ids[l]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `row_to_col[i]` is the column matched to row `i` of the zero-padded
    /// square cost matrix.
    pub row_to_col: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost perfect matching (Kuhn–Munkres with potentials).
/// Rectangular inputs are padded with zero rows or columns.
pub fn hungarian(cost: &Matrix) -> Assignment {
    let m = cost.rows().max(cost.cols());
    let c = |i: usize, j: usize| {
        if i < cost.rows() && j < cost.cols() {
            cost[(i, j)]
        } else {
            0.0
        }
    };
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0; m + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=m {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; m];
    for j in 1..=m {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    let total = row_to_col.iter().enumerate().map(|(i, &j)| c(i, j)).sum();
    Assignment {
        row_to_col,
        cost: total,
    }
}

/// Best one-to-one matching accuracy.
pub fn clustering_accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    if t.n == 0 {
        return Ok(1.0);
    }
    let kt = t.counts.len();
    let kp = t.col_sums().len();
    let cost = Matrix::from_fn(kt, kp, |i, j| -(t.counts[i][j] as f64));
    let matched = -hungarian(&cost).cost;
    Ok(matched / t.n as f64)
}

fn entropy(sums: &[usize], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the geometric mean of the entropies.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    if t.n == 0 {
        return Ok(1.0);
    }
    let n = t.n as f64;
    let (a, b) = (t.row_sums(), t.col_sums());
    let (ha, hb) = (entropy(&a, n), entropy(&b, n));
    if ha == 0.0 || hb == 0.0 {
        // a zero entropy means a single cluster on that side
        return Ok(if a.len() == 1 && b.len() == 1 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (a[i] as f64 * b[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Hubert–Arabie adjusted Rand index.
pub fn ari(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    let index: f64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let sa: f64 = t.row_sums().into_iter().map(pairs).sum();
    let sb: f64 = t.col_sums().into_iter().map(pairs).sum();
    let total = pairs(t.n);
    let expected = if total > 0.0 { sa * sb / total } else { 0.0 };
    let max_index = 0.5 * (sa + sb);
    let denom = max_index - expected;
    if denom == 0.0 {
        // both partitions all-singletons or both a single cluster
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

/// F1 of the "same cluster" relation over all unordered pairs.
pub fn pairwise_f1(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(truth, pred)?;
    let tp: f64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let true_pairs: f64 = t.row_sums().into_iter().map(pairs).sum();
    let pred_pairs: f64 = t.col_sums().into_iter().map(pairs).sum();
    if true_pairs == 0.0 && pred_pairs == 0.0 {
        // identical all-singleton partitions
        return Ok(1.0);
    }
    let p = if pred_pairs > 0.0 { tp / pred_pairs } else { 0.0 };
    let r = if true_pairs > 0.0 { tp / true_pairs } else { 0.0 };
    if p + r == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * p * r / (p + r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub ca: f64,
    pub nmi: f64,
    pub ari: f64,
    pub f1: f64,
}

pub fn score_all(truth: &[usize], pred: &[usize]) -> Result<Scores> {
    Ok(Scores {
        ca: clustering_accuracy(truth, pred)?,
        nmi: nmi(truth, pred)?,
        ari: ari(truth, pred)?,
        f1: pairwise_f1(truth, pred)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ca_examples() {
        let t = [0, 0, 1, 1, 2, 2];
        assert_eq!(clustering_accuracy(&t, &t).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&t, &[2, 2, 0, 0, 1, 1]).unwrap(), 1.0);
        let ca = clustering_accuracy(&t, &[0, 1, 1, 1, 2, 2]).unwrap();
        assert!((ca - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rectangular_ca() {
        let ca = clustering_accuracy(&[0, 0, 0, 0], &[0, 1, 2, 2]).unwrap();
        assert!((ca - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nmi_examples() {
        assert_eq!(nmi(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), 0.0);
        assert!((nmi(&[0, 0, 1, 2], &[5, 5, 3, 4]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[0, 0, 0], &[1, 1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap(), 0.0);
        assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(ari(&[0, 1, 2], &[2, 0, 1]).unwrap(), 1.0);
    }

    #[test]
    fn f1_examples() {
        assert_eq!(pairwise_f1(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(pairwise_f1(&[0, 0, 1, 1], &[0, 1, 2, 3]).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            clustering_accuracy(&[0, 1], &[0]),
            Err(Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(nmi(&[0], &[]).is_err());
        assert!(ari(&[0], &[]).is_err());
        assert!(pairwise_f1(&[0], &[]).is_err());
    }

    #[test]
    fn hungarian_small_cases() {
        let eye = Matrix::identity(4);
        let a = hungarian(&eye.scale(-1.0));
        assert_eq!(a.row_to_col, vec![0, 1, 2, 3]);
        let j_minus_i = Matrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(hungarian(&j_minus_i).row_to_col, vec![0, 1, 2]);
        assert_eq!(hungarian(&j_minus_i).cost, 0.0);
    }
}
