use super::{LinalgError, Matrix};

/// Pivot ratio below which a matrix is reported as rank deficient.
const RANK_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let col = lu.col(k);
            let (p, pv) = (k..n)
                .map(|i| (i, col[i].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if p != k {
                perm.swap(p, k);
                let data = lu.as_mut_slice();
                for j in 0..n {
                    data.swap(j * n + p, j * n + k);
                }
            }
            max_pivot = max_pivot.max(pv);
            min_pivot = min_pivot.min(pv);
            if pv == 0.0 {
                continue;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= pivot;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                let data = lu.as_mut_slice();
                for i in k + 1..n {
                    data[j * n + i] -= data[k * n + i] * ukj;
                }
            }
        }

        if n > 0 && (min_pivot == 0.0 || min_pivot <= RANK_TOL * n as f64 * max_pivot) {
            return Err(LinalgError::Singular {
                condition_estimate: if min_pivot == 0.0 {
                    f64::INFINITY
                } else {
                    max_pivot / min_pivot
                },
            });
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix, LinalgError> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "lu_solve",
                left: self.lu.shape(),
                right: b.shape(),
            });
        }
        let mut x = Matrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let bj = b.col(j);
            let xj = x.col_mut(j);
            for i in 0..n {
                xj[i] = bj[self.perm[i]];
            }
            for k in 0..n {
                let xk = xj[k];
                if xk != 0.0 {
                    let lcol = self.lu.col(k);
                    for i in k + 1..n {
                        xj[i] -= lcol[i] * xk;
                    }
                }
            }
            for k in (0..n).rev() {
                let ucol = self.lu.col(k);
                xj[k] /= ucol[k];
                let xk = xj[k];
                if xk != 0.0 {
                    for i in 0..k {
                        xj[i] -= ucol[i] * xk;
                    }
                }
            }
        }
        Ok(x)
    }
}

/// Solves `a X = b` for square nonsingular `a`.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if b.rows() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            op: "solve_linear",
            left: a.shape(),
            right: b.shape(),
        });
    }
    Lu::factor(a)?.solve(b)
}
