//! Symmetric eigendecomposition: Householder tridiagonalization followed by
//! implicit-shift QL sweeps on the tridiagonal form.

use super::{LinalgError, Matrix};

/// Relative tolerance used when checking that an input is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenpairs of a symmetric matrix, sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Matrix,
}

impl SymEigen {
    /// Rebuilds `V diag(values) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.col(k);
            for j in 0..n {
                let s = lam * v[j];
                if s != 0.0 {
                    for (o, &vi) in out.col_mut(j).iter_mut().zip(v) {
                        *o += s * vi;
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn check_symmetric(a: &Matrix) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let asym = a.asymmetry();
    let scale = a.frobenius_norm().max(1e-12);
    if asym > SYMMETRY_TOL * scale {
        return Err(LinalgError::NotSymmetric {
            asymmetry: asym / scale,
        });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix.
///
/// Only the lower triangle is read after the symmetry check, so inputs that
/// are symmetric up to rounding give exactly orthogonal eigenvectors.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen, LinalgError> {
    check_symmetric(a)?;
    let (mut values, mut vectors) = tridiagonal_eigen(a)?;
    sort_ascending(&mut values, &mut vectors);
    Ok(SymEigen { values, vectors })
}

/// Unsorted eigenpairs of the symmetric part of `a`.
pub(crate) fn tridiagonal_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix), LinalgError> {
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let mut v = Matrix::from_fn(n, n, |i, j| if i >= j { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;
    Ok((d, v))
}

fn sort_ascending(values: &mut Vec<f64>, vectors: &mut Matrix) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    if order.iter().enumerate().all(|(k, &i)| k == i) {
        return;
    }
    *values = order.iter().map(|&i| values[i]).collect();
    *vectors = vectors.select_columns(&order);
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal, `e[1..]` the sub-diagonal and `v` the accumulated orthogonal
/// transform.
fn tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    let vkj = v[(k, j)];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = v.col_mut(j);
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                let col = v.col_mut(j);
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration with Wilkinson-style shifts on the tridiagonal
/// matrix `(d, e)`, accumulating rotations into `v`.
fn ql_implicit(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_sweeps = 30 * n.max(1);
    let mut sweeps = 0usize;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(LinalgError::NoConvergence {
                        iterations: sweeps,
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_columns(v, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[inline]
fn rotate_columns(v: &mut Matrix, i: usize, c: f64, s: f64) {
    let n = v.rows();
    let data = v.as_mut_slice();
    let (left, right) = data.split_at_mut((i + 1) * n);
    let ci = &mut left[i * n..];
    let ci1 = &mut right[..n];
    for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}
