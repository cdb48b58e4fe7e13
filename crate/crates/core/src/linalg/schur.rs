//! Real Schur form `A = Q T Qᵀ`.
//!
//! General matrices go through Householder reduction to upper Hessenberg
//! form and Francis double-shift QR sweeps. Exactly symmetric matrices take
//! the tridiagonal route in [`super::eigen`], which yields a diagonal `T`.

use super::eigen::tridiagonal_eigen;
use super::{LinalgError, Matrix};

/// `A = Q T Qᵀ` with `Q` orthogonal and `T` quasi-upper-triangular: 1×1
/// diagonal blocks for real eigenvalues, 2×2 blocks for complex pairs.
#[derive(Debug, Clone)]
pub struct SchurDecomposition {
    pub q: Matrix,
    pub t: Matrix,
}

impl SchurDecomposition {
    /// Starting index and size (1 or 2) of each diagonal block of `T`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        diagonal_blocks(&self.t)
    }

    pub fn reconstruct(&self) -> Matrix {
        let qt = super::matmul(&self.q, &self.t).expect("square factors");
        super::matmul_nt(&qt, &self.q).expect("square factors")
    }
}

pub(crate) fn diagonal_blocks(t: &Matrix) -> Vec<(usize, usize)> {
    let n = t.rows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            out.push((i, 2));
            i += 2;
        } else {
            out.push((i, 1));
            i += 1;
        }
    }
    out
}

/// Real Schur decomposition of a square matrix.
pub fn schur(a: &Matrix) -> Result<SchurDecomposition, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(SchurDecomposition {
            q: Matrix::zeros(0, 0),
            t: Matrix::zeros(0, 0),
        });
    }
    if a.asymmetry() == 0.0 {
        let (values, q) = tridiagonal_eigen(a)?;
        return Ok(SchurDecomposition {
            q,
            t: Matrix::from_diag(&values),
        });
    }

    let mut h = a.clone();
    let mut q = Matrix::identity(n);
    hessenberg(&mut h, &mut q);
    francis_qr(&mut h, &mut q)?;
    Ok(SchurDecomposition { q, t: h })
}

/// Householder vector `v` (with `v[0] = 1`) and `tau` such that
/// `(I - tau v vᵀ) x = (beta, 0, .., 0)`.
fn householder(x: &[f64], v: &mut [f64]) -> f64 {
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let tail = x[1..].iter().map(|a| a * a).sum::<f64>();
    v[0] = 1.0;
    if norm == 0.0 || tail == 0.0 {
        v[1..].iter_mut().for_each(|a| *a = 0.0);
        return 0.0;
    }
    let u0 = x[0] + x[0].signum() * norm;
    for (vi, &xi) in v[1..].iter_mut().zip(&x[1..]) {
        *vi = xi / u0;
    }
    let vtv: f64 = v.iter().map(|a| a * a).sum();
    2.0 / vtv
}

/// Applies `I - tau v vᵀ` from the left to rows `r0..r0+len(v)`, columns `c0..c1`.
fn reflect_rows(m: &mut Matrix, v: &[f64], tau: f64, r0: usize, c0: usize, c1: usize) {
    if tau == 0.0 {
        return;
    }
    for j in c0..c1 {
        let col = &mut m.col_mut(j)[r0..r0 + v.len()];
        let s = tau * col.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        for (a, &b) in col.iter_mut().zip(v) {
            *a -= s * b;
        }
    }
}

/// Applies `I - tau v vᵀ` from the right to columns `c0..c0+len(v)`, rows `r0..r1`.
fn reflect_cols(m: &mut Matrix, v: &[f64], tau: f64, c0: usize, r0: usize, r1: usize) {
    if tau == 0.0 {
        return;
    }
    let rows = m.rows();
    let data = m.as_mut_slice();
    for i in r0..r1 {
        let mut s = 0.0;
        for (k, &vk) in v.iter().enumerate() {
            s += data[(c0 + k) * rows + i] * vk;
        }
        s *= tau;
        for (k, &vk) in v.iter().enumerate() {
            data[(c0 + k) * rows + i] -= s * vk;
        }
    }
}

fn hessenberg(h: &mut Matrix, q: &mut Matrix) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let x: Vec<f64> = h.col(k)[k + 1..].to_vec();
        let len = x.len();
        let tau = householder(&x, &mut v[..len]);
        if tau == 0.0 {
            continue;
        }
        reflect_rows(h, &v[..len], tau, k + 1, k, n);
        reflect_cols(h, &v[..len], tau, k + 1, 0, n);
        reflect_cols(q, &v[..len], tau, k + 1, 0, n);
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
}

fn negligible(h: &Matrix, i: usize, norm: f64) -> bool {
    let mut s = h[(i - 1, i - 1)].abs() + h[(i, i)].abs();
    if s == 0.0 {
        s = norm;
    }
    h[(i, i - 1)].abs() <= f64::EPSILON * s
}

fn francis_qr(h: &mut Matrix, q: &mut Matrix) -> Result<(), LinalgError> {
    let n = h.rows();
    let norm = h.frobenius_norm();
    let max_iter = 30 * n;
    let mut total = 0usize;
    let mut its = 0usize;
    // Active window is rows/cols lo..end.
    let mut end = n;

    while end > 1 {
        let hi = end - 1;
        let mut lo = hi;
        while lo > 0 {
            if negligible(h, lo, norm) {
                h[(lo, lo - 1)] = 0.0;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            end -= 1;
            its = 0;
            continue;
        }
        if lo + 1 == hi {
            standardize_block(h, q, lo);
            end -= 2;
            its = 0;
            continue;
        }

        total += 1;
        its += 1;
        if total > max_iter {
            let residual = (lo + 1..=hi).map(|i| h[(i, i - 1)].abs()).fold(0.0, f64::max);
            return Err(LinalgError::NoConvergence {
                iterations: total,
                residual,
            });
        }

        let (s, t) = if its % 10 == 0 {
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            (1.5 * w, w * w)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            (a + d, a * d - b * c)
        };
        francis_step(h, q, lo, hi, s, t);
    }
    Ok(())
}

fn francis_step(h: &mut Matrix, q: &mut Matrix, lo: usize, hi: usize, s: f64, t: f64) {
    let n = h.rows();
    let h00 = h[(lo, lo)];
    let h10 = h[(lo + 1, lo)];
    let mut x = h00 * h00 + h[(lo, lo + 1)] * h10 - s * h00 + t;
    let mut y = h10 * (h00 + h[(lo + 1, lo + 1)] - s);
    let mut z = h10 * h[(lo + 2, lo + 1)];
    let mut v = [0.0; 3];

    for k in lo..hi - 1 {
        let tau = householder(&[x, y, z], &mut v);
        let r = if k > lo { k - 1 } else { lo };
        reflect_rows(h, &v, tau, k, r, n);
        let r2 = (k + 3).min(hi);
        reflect_cols(h, &v, tau, k, 0, r2 + 1);
        reflect_cols(q, &v, tau, k, 0, n);
        x = h[(k + 1, k)];
        y = h[(k + 2, k)];
        if k + 3 <= hi {
            z = h[(k + 3, k)];
        }
        if k > lo {
            h[(k + 1, k - 1)] = 0.0;
            h[(k + 2, k - 1)] = 0.0;
        }
    }
    let mut v2 = [0.0; 2];
    let tau = householder(&[x, y], &mut v2);
    reflect_rows(h, &v2, tau, hi - 1, hi - 2, n);
    reflect_cols(h, &v2, tau, hi - 1, 0, hi + 1);
    reflect_cols(q, &v2, tau, hi - 1, 0, n);
    if hi >= 3 {
        h[(hi, hi - 3)] = 0.0;
    }
    h[(hi, hi - 2)] = 0.0;
}

/// Splits a 2×2 diagonal block at `(i, i)` with real eigenvalues into two
/// 1×1 blocks via a Givens rotation. Complex pairs are left as 2×2 blocks.
fn standardize_block(h: &mut Matrix, q: &mut Matrix, i: usize) {
    let n = h.rows();
    let a = h[(i, i)];
    let b = h[(i, i + 1)];
    let c = h[(i + 1, i)];
    let d = h[(i + 1, i + 1)];
    if c == 0.0 {
        return;
    }
    let p = 0.5 * (a - d);
    let disc = p * p + b * c;
    if disc < 0.0 {
        return;
    }
    let root = disc.sqrt();
    // Eigenvalue farther from d keeps the eigenvector computation well scaled.
    let lam = d + p + p.signum() * root;
    let lam = if p == 0.0 { d + root } else { lam };
    let (mut cs, mut sn) = if (lam - d).abs() >= b.abs() {
        (lam - d, c)
    } else {
        (b, lam - a)
    };
    let r = cs.hypot(sn);
    if r == 0.0 {
        return;
    }
    cs /= r;
    sn /= r;
    // G = [[cs, -sn], [sn, cs]]; first column is the eigenvector.
    for j in 0..n {
        let x = h[(i, j)];
        let y = h[(i + 1, j)];
        h[(i, j)] = cs * x + sn * y;
        h[(i + 1, j)] = -sn * x + cs * y;
    }
    for r0 in 0..n {
        let x = h[(r0, i)];
        let y = h[(r0, i + 1)];
        h[(r0, i)] = cs * x + sn * y;
        h[(r0, i + 1)] = -sn * x + cs * y;
    }
    for r0 in 0..n {
        let x = q[(r0, i)];
        let y = q[(r0, i + 1)];
        q[(r0, i)] = cs * x + sn * y;
        q[(r0, i + 1)] = -sn * x + cs * y;
    }
    h[(i + 1, i)] = 0.0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matmul_tn;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn check(a: &Matrix, s: &SchurDecomposition) {
        let n = a.rows();
        let qtq = matmul_tn(&s.q, &s.q).unwrap();
        let orth = qtq.sub(&Matrix::identity(n)).unwrap().frobenius_norm();
        assert!(orth <= 1e-10 * n as f64, "orthogonality {orth}");
        let rec = s.reconstruct().sub(a).unwrap().frobenius_norm();
        assert!(rec <= 1e-8 * a.frobenius_norm().max(1e-12), "reconstruction {rec}");
        // quasi-triangular: nothing below the first sub-diagonal, no two
        // consecutive sub-diagonal entries
        for j in 0..n {
            for i in j + 2..n {
                assert_eq!(s.t[(i, j)], 0.0);
            }
        }
        for i in 1..n.saturating_sub(1) {
            assert!(s.t[(i, i - 1)] == 0.0 || s.t[(i + 1, i)] == 0.0);
        }
    }

    #[test]
    fn upper_triangular_is_fixed_point() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[0.0, 4.0, 5.0], &[0.0, 0.0, 6.0]]);
        let s = schur(&a).unwrap();
        assert_eq!(s.t, a);
        assert_eq!(s.q, Matrix::identity(3));
    }

    #[test]
    fn symmetric_gives_diagonal() {
        let b = random(8, 3);
        let a = b.add(&b.transpose()).unwrap();
        let s = schur(&a).unwrap();
        check(&a, &s);
        for j in 0..8 {
            for i in 0..8 {
                if i != j {
                    assert!(s.t[(i, j)].abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn nearly_symmetric_goes_through_francis() {
        let b = random(9, 4);
        let mut a = b.add(&b.transpose()).unwrap();
        a[(0, 1)] += 1e-13;
        let s = schur(&a).unwrap();
        check(&a, &s);
        for j in 0..9 {
            for i in 0..9 {
                if i != j {
                    assert!(s.t[(i, j)].abs() <= 1e-8, "t[{i},{j}] = {}", s.t[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn random_general() {
        for (&n, seed) in [2usize, 5, 10, 12, 25, 50].iter().zip(10u64..) {
            let a = random(n, seed);
            let s = schur(&a).unwrap();
            check(&a, &s);
        }
    }

    #[test]
    fn rotation_keeps_complex_block() {
        let a = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let s = schur(&a).unwrap();
        check(&a, &s);
        assert_eq!(s.blocks(), vec![(0, 2)]);
    }

    #[test]
    fn real_two_by_two_is_split() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let s = schur(&a).unwrap();
        check(&a, &s);
        assert_eq!(s.blocks(), vec![(0, 1), (1, 1)]);
        let mut ev = s.t.diag();
        ev.sort_by(f64::total_cmp);
        let r = (33.0f64).sqrt();
        assert!((ev[0] - (5.0 - r) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (5.0 + r) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(schur(&Matrix::zeros(2, 3)), Err(LinalgError::NotSquare { .. })));
    }
}
