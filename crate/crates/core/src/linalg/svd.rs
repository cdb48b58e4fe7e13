use super::matrix::dot;
use super::{LinalgError, Matrix};

/// Thin SVD `A = U diag(s) Vᵀ` with `s` non-negative and descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// m×k, orthonormal columns (k = min(m, n)).
    pub u: Matrix,
    pub s: Vec<f64>,
    /// k×n, orthonormal rows.
    pub vt: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|v| *v *= sj);
        }
        super::matmul(&us, &self.vt).expect("conforming factors")
    }
}

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition via one-sided (Hestenes) Jacobi
/// rotations. Wide inputs are handled through their transpose.
pub fn svd_thin(a: &Matrix) -> Result<Svd, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose())?;
        return Ok(Svd {
            u: t.vt.transpose(),
            s: t.s,
            vt: t.u.transpose(),
        });
    }
    svd_tall(a)
}

fn svd_tall(a: &Matrix) -> Result<Svd, LinalgError> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * (m.max(1) as f64).sqrt();

    let mut converged = n < 2;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                iterations: sweep,
                residual: off_orthogonality(&w),
            });
        }
        sweep += 1;
        converged = true;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = dot(w.col(p), w.col(p));
                let beta = dot(w.col(q), w.col(q));
                let gamma = dot(w.col(p), w.col(q));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
    }

    let mut s: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));

    let mut u = Matrix::zeros(m, n);
    let mut vt = Matrix::zeros(n, n);
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let mut null_cols = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        let sj = s[j];
        if sj > s_max * f64::EPSILON * m as f64 && sj > 0.0 {
            for (ui, &wi) in u.col_mut(k).iter_mut().zip(w.col(j)) {
                *ui = wi / sj;
            }
        } else {
            null_cols.push(k);
        }
        for i in 0..n {
            vt[(k, i)] = v[(i, j)];
        }
    }
    s = order.iter().map(|&j| s[j]).collect();
    complete_basis(&mut u, &null_cols);
    Ok(Svd { u, s, vt })
}

fn rotate(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    let data = m.as_mut_slice();
    let (left, right) = data.split_at_mut(q * rows);
    let cp = &mut left[p * rows..(p + 1) * rows];
    let cq = &mut right[..rows];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = *y;
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

fn off_orthogonality(w: &Matrix) -> f64 {
    let n = w.cols();
    let mut worst = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            let a = dot(w.col(p), w.col(p));
            let b = dot(w.col(q), w.col(q));
            let g = dot(w.col(p), w.col(q));
            if a > 0.0 && b > 0.0 {
                worst = worst.max(g.abs() / (a * b).sqrt());
            }
        }
    }
    worst
}

/// Fills the listed (zero) columns of `u` with unit vectors orthogonal to
/// every other column, via Gram-Schmidt against the standard basis.
fn complete_basis(u: &mut Matrix, null_cols: &[usize]) {
    let m = u.rows();
    let mut candidate = 0usize;
    for &k in null_cols {
        while candidate < m {
            let mut e = vec![0.0; m];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for j in 0..u.cols() {
                    if j == k {
                        continue;
                    }
                    let proj = dot(&e, u.col(j));
                    for (ei, &uj) in e.iter_mut().zip(u.col(j)) {
                        *ei -= proj * uj;
                    }
                }
            }
            let norm = dot(&e, &e).sqrt();
            if norm > 1e-6 {
                e.iter_mut().for_each(|x| *x /= norm);
                u.set_col(k, &e);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul_nt, matmul_tn};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(a: &Matrix, svd: &Svd) {
        let k = svd.s.len();
        assert!(svd.s.iter().all(|&v| v >= 0.0));
        assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
        let rec = svd.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(rec <= 1e-8 * a.frobenius_norm().max(1e-12), "reconstruction {rec}");
        let utu = matmul_tn(&svd.u, &svd.u).unwrap();
        assert!(utu.sub(&Matrix::identity(k)).unwrap().frobenius_norm() < 1e-10 * k as f64);
        let vvt = matmul_nt(&svd.vt, &svd.vt).unwrap();
        assert!(vvt.sub(&Matrix::identity(k)).unwrap().frobenius_norm() < 1e-10 * k as f64);
    }

    #[test]
    fn diagonal_values() {
        let a = Matrix::from_diag(&[2.0, 0.0]);
        let svd = svd_thin(&a).unwrap();
        assert_eq!(svd.s, vec![2.0, 0.0]);
        check(&a, &svd);
    }

    #[test]
    fn orthogonal_has_unit_values() {
        let t = 0.3f64;
        let q = Matrix::from_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let svd = svd_thin(&q).unwrap();
        for s in svd.s {
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(m, n) in &[(8usize, 5usize), (5, 8), (1, 4), (4, 1), (25, 25), (50, 10)] {
            let a = Matrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let svd = svd_thin(&a).unwrap();
            assert_eq!(svd.s.len(), m.min(n));
            check(&a, &svd);
        }
    }

    #[test]
    fn rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = Matrix::from_fn(7, 2, |_, _| rng.gen_range(-1.0..1.0));
        let c = Matrix::from_fn(2, 5, |_, _| rng.gen_range(-1.0..1.0));
        let a = crate::linalg::matmul(&b, &c).unwrap();
        let svd = svd_thin(&a).unwrap();
        check(&a, &svd);
        assert!(svd.s[2] <= 1e-12 * svd.s[0]);
    }
}
