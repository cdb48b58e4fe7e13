//! Affinity construction from a self-representation and normalized
//! spectral clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen, Matrix};

pub const KMEANS_RESTARTS: usize = 20;
pub const KMEANS_MAX_ITERS: usize = 300;
pub const DEFAULT_GAMMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AffinityKind {
    /// `(|Z| + |Zᵀ|) / 2`.
    SymAbs,
    /// `(|z_iᵀ z_j| / (‖z_i‖ ‖z_j‖))^γ` over columns of `Z`.
    GroupingEffect { gamma: f64 },
}

impl Default for AffinityKind {
    fn default() -> Self {
        AffinityKind::GroupingEffect {
            gamma: DEFAULT_GAMMA,
        }
    }
}

/// Symmetric, non-negative affinity with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityGraph {
    pub g: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

pub fn affinity_from_z(z: &Matrix, kind: AffinityKind) -> Result<AffinityGraph> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch {
            what: "Z must be square; columns",
            expected: z.rows(),
            actual: z.cols(),
        });
    }
    let n = z.rows();
    let g = match kind {
        AffinityKind::SymAbs => Matrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                0.5 * (z[(i, j)].abs() + z[(j, i)].abs())
            }
        }),
        AffinityKind::GroupingEffect { gamma } => {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
            }
            let norms: Vec<f64> = (0..n).map(|j| dot(z.col(j), z.col(j)).sqrt()).collect();
            let mut g = Matrix::zeros(n, n);
            for j in 0..n {
                if norms[j] == 0.0 {
                    continue;
                }
                for i in 0..j {
                    if norms[i] == 0.0 {
                        continue;
                    }
                    let cos = (dot(z.col(i), z.col(j)).abs() / (norms[i] * norms[j])).min(1.0);
                    let v = cos.powf(gamma);
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
            g
        }
    };
    Ok(AffinityGraph { g })
}

/// Row-normalized bottom-`k` eigenvectors of `I − D^{-1/2} G D^{-1/2}`,
/// as an n×k matrix whose rows are the embedded points.
pub fn spectral_embedding(g: &AffinityGraph, k: usize) -> Result<Matrix> {
    let n = g.g.rows();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let d: f64 = g.g.col(i).iter().sum();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut lsym = Matrix::from_fn(n, n, |i, j| -inv_sqrt[i] * g.g[(i, j)] * inv_sqrt[j]);
    for i in 0..n {
        lsym[(i, i)] += 1.0;
    }
    // G is symmetric, so L_sym is up to rounding; symmetrize exactly.
    let lsym = Matrix::from_fn(n, n, |i, j| 0.5 * (lsym[(i, j)] + lsym[(j, i)]));
    let eig = sym_eigen(&lsym)?;
    let mut emb = Matrix::from_fn(n, k, |i, j| eig.vectors[(i, j)]);
    for i in 0..n {
        let norm: f64 = (0..k).map(|j| emb[(i, j)].powi(2)).sum::<f64>().sqrt();
        if norm > 0.0 {
            for j in 0..k {
                emb[(i, j)] /= norm;
            }
        }
    }
    Ok(emb)
}

/// Normalized spectral clustering followed by seeded k-means.
pub fn spectral_cluster(g: &AffinityGraph, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = g.g.rows();
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let emb = spectral_embedding(g, k)?;
    let points: Vec<Vec<f64>> = (0..n).map(|i| emb.row(i)).collect();
    let km = kmeans(&points, k, seed, KMEANS_RESTARTS, KMEANS_MAX_ITERS)?;
    Ok(ClusterAssignment { labels: km.labels, k })
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with greedy farthest-point seeding. Each restart draws
/// its first center at random; the best-inertia run wins (earliest on ties).
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::invalid("k", format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let first = rng.gen_range(0..n);
        let run = lloyd(points, farthest_point_init(points, k, first), max_iters);
        if best.as_ref().map_or(true, |b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn farthest_point_init(points: &[Vec<f64>], k: usize, first: usize) -> Vec<Vec<f64>> {
    let mut centers = vec![points[first].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| dist2(p, &points[first])).collect();
    while centers.len() < k {
        let (idx, _) = min_d
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc });
        centers.push(points[idx].clone());
        for (m, p) in min_d.iter_mut().zip(points) {
            *m = m.min(dist2(p, &points[idx]));
        }
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let (c, d) = centers
                .iter()
                .enumerate()
                .map(|(c, ctr)| (c, dist2(p, ctr)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            inertia += d;
            c
        })
        .collect();
    (labels, inertia)
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iters: usize) -> KMeansResult {
    let k = centers.len();
    let dim = points[0].len();
    let (mut labels, mut inertia) = assign(points, &centers);
    for _ in 0..max_iters {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // Re-seed an empty cluster at the point worst served by its center.
                let far = points
                    .iter()
                    .zip(&labels)
                    .map(|(p, &l)| dist2(p, &centers[l]))
                    .enumerate()
                    .fold((0, -1.0), |acc, (i, d)| if d > acc.1 { (i, d) } else { acc })
                    .0;
                centers[c] = points[far].clone();
            }
        }
        let (new_labels, new_inertia) = assign(points, &centers);
        let changed = new_labels != labels;
        labels = new_labels;
        inertia = new_inertia;
        if !changed {
            break;
        }
    }
    KMeansResult {
        labels,
        centers,
        inertia,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn identity_symabs_is_empty() {
        let g = affinity_from_z(&Matrix::identity(4), AffinityKind::SymAbs).unwrap();
        assert_eq!(g.g, Matrix::zeros(4, 4));
    }

    #[test]
    fn orthogonal_columns_have_no_grouping_affinity() {
        let z = Matrix::from_diag(&[1.0, -2.0, 3.0]);
        let g = affinity_from_z(&z, AffinityKind::default()).unwrap();
        assert_eq!(g.g, Matrix::zeros(3, 3));
    }

    #[test]
    fn grouping_effect_pairwise_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut z = Matrix::from_fn(6, 6, |_, _| rng.gen_range(-1.0..1.0));
        z.col_mut(4).iter_mut().for_each(|v| *v = 0.0);
        let g = affinity_from_z(&z, AffinityKind::GroupingEffect { gamma: 2.0 }).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if i == j || i == 4 || j == 4 {
                    0.0
                } else {
                    let (mut ip, mut ni, mut nj) = (0.0, 0.0, 0.0);
                    for r in 0..6 {
                        ip += z[(r, i)] * z[(r, j)];
                        ni += z[(r, i)] * z[(r, i)];
                        nj += z[(r, j)] * z[(r, j)];
                    }
                    (ip * ip) / (ni * nj)
                };
                assert!((g.g[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symabs_formula() {
        let z = Matrix::from_rows(&[&[1.0, -2.0], &[4.0, 3.0]]);
        let g = affinity_from_z(&z, AffinityKind::SymAbs).unwrap();
        assert_eq!(g.g, Matrix::from_rows(&[&[0.0, 3.0], &[3.0, 0.0]]));
    }

    fn two_blocks(a: usize, b: usize) -> AffinityGraph {
        let n = a + b;
        AffinityGraph {
            g: Matrix::from_fn(n, n, |i, j| {
                if i != j && ((i < a) == (j < a)) {
                    1.0
                } else {
                    0.0
                }
            }),
        }
    }

    #[test]
    fn disconnected_blocks_are_recovered() {
        let g = two_blocks(4, 5);
        let a = spectral_cluster(&g, 2, 3).unwrap();
        assert!(a.labels[..4].iter().all(|&l| l == a.labels[0]));
        assert!(a.labels[4..].iter().all(|&l| l == a.labels[4]));
        assert_ne!(a.labels[0], a.labels[4]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let z = Matrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let g = affinity_from_z(&z, AffinityKind::SymAbs).unwrap();
        let a = spectral_cluster(&g, 5, 0).unwrap();
        let mut sorted = a.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn k_larger_than_n_is_an_error() {
        let g = two_blocks(2, 2);
        assert!(spectral_cluster(&g, 5, 0).is_err());
        assert!(spectral_cluster(&g, 0, 0).is_err());
    }

    #[test]
    fn embedding_of_isolated_vertex() {
        let mut g = two_blocks(3, 3);
        for j in 0..6 {
            g.g[(0, j)] = 0.0;
            g.g[(j, 0)] = 0.0;
        }
        let emb = spectral_embedding(&g, 3).unwrap();
        assert!(emb.as_slice().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn kmeans_zero_inertia_for_k_equals_n() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let km = kmeans(&pts, 3, 0, 3, 10).unwrap();
        assert_eq!(km.inertia, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let z = Matrix::from_fn(12, 12, |_, _| rng.gen_range(-1.0..1.0));
        let g = affinity_from_z(&z, AffinityKind::default()).unwrap();
        assert_eq!(spectral_cluster(&g, 3, 7).unwrap(), spectral_cluster(&g, 3, 7).unwrap());
    }
}
