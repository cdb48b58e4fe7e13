//! Bartels–Stewart solver for `A Z + Z B = C`.
//!
//! Both coefficient matrices are brought to real Schur form, the transformed
//! equation `Ta Y + Y Tb = F` is solved block by block (block sizes 1 or 2,
//! so each small system has at most four unknowns), and `Z = Qa Y Qbᵀ`.
//!
//! Unknowns behind a vanishing small-system pivot (an eigenvalue pair with
//! `λ_i(A) + λ_j(B) ≈ 0`) are set to zero, the minimum-norm choice along the
//! degenerate directions. This is what makes `HᵀH Z + α Z L = HᵀH` solvable
//! when `HᵀH` is rank deficient and `L` has a null space: the right-hand
//! side lives in the range of `HᵀH`. The final residual check decides
//! whether that was consistent; if not, the worst collision is reported.

use super::schur::{schur, SchurDecomposition};
use super::{matmul, matmul_nt, matmul_tn, LinalgError, Matrix};

/// A small-system pivot below `PIVOT_TOL * (‖A‖_F + ‖B‖_F)` counts as an
/// eigenvalue collision.
pub const PIVOT_TOL: f64 = 1e-13;
/// A collided right-hand side entry above `RHS_TOL * max(‖C‖_F, 1e-12)`
/// is blamed when the residual check fails.
pub const RHS_TOL: f64 = 1e-10;
/// Accepted residual: `‖AZ + ZB - C‖_F <= RESIDUAL_TOL * max(1, ‖C‖_F)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Solver with the right-hand coefficient `B` already in Schur form, for
/// repeated solves against a fixed `B`.
#[derive(Debug, Clone)]
pub struct SylvesterSolver {
    b: Matrix,
    schur_b: SchurDecomposition,
    blocks_b: Vec<(usize, usize)>,
}

impl SylvesterSolver {
    pub fn new(b: &Matrix) -> Result<Self, LinalgError> {
        let schur_b = schur(b)?;
        let blocks_b = schur_b.blocks();
        Ok(Self {
            b: b.clone(),
            schur_b,
            blocks_b,
        })
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// Solves `a Z + Z b = c` for the prepared `b`.
    pub fn solve(&self, a: &Matrix, c: &Matrix) -> Result<Matrix, LinalgError> {
        self.solve_with_residual(a, c).map(|(z, _)| z)
    }

    /// Like [`Self::solve`], also returning `‖aZ + Zb − c‖_F`.
    pub fn solve_with_residual(&self, a: &Matrix, c: &Matrix) -> Result<(Matrix, f64), LinalgError> {
        let p = a.rows();
        let q = self.b.rows();
        if !a.is_square() {
            return Err(LinalgError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if c.shape() != (p, q) {
            return Err(LinalgError::DimensionMismatch {
                op: "solve_sylvester",
                left: (p, q),
                right: c.shape(),
            });
        }
        let schur_a = schur(a)?;
        let blocks_a = schur_a.blocks();

        // F = Qaᵀ C Qb
        let f = matmul(&matmul_tn(&schur_a.q, c)?, &self.schur_b.q)?;
        let pivot_tol = PIVOT_TOL * (a.frobenius_norm() + self.b.frobenius_norm());
        let rhs_tol = RHS_TOL * c.frobenius_norm().max(1e-12);
        let (y, worst) = solve_quasi_triangular(
            &schur_a.t,
            &blocks_a,
            &self.schur_b.t,
            &self.blocks_b,
            f,
            pivot_tol,
        );
        let z = matmul_nt(&matmul(&schur_a.q, &y)?, &self.schur_b.q)?;

        let residual = sylvester_residual(a, &self.b, c, &z)?;
        let bound = RESIDUAL_TOL * c.frobenius_norm().max(1.0);
        if !(residual <= bound) {
            return Err(match worst {
                Some(col) if col.rhs > rhs_tol => LinalgError::EigenvalueCollision {
                    i: col.i,
                    j: col.j,
                    lambda_a: col.lambda_a,
                    lambda_b: col.lambda_b,
                },
                _ => LinalgError::ResidualTooLarge { residual, bound },
            });
        }
        Ok((z, residual))
    }
}

/// Solves `a Z + Z b = c` by Bartels–Stewart.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix, LinalgError> {
    if !b.is_square() {
        return Err(LinalgError::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    SylvesterSolver::new(b)?.solve(a, c)
}

/// `‖a Z + Z b − c‖_F`.
pub fn sylvester_residual(a: &Matrix, b: &Matrix, c: &Matrix, z: &Matrix) -> Result<f64, LinalgError> {
    let az = matmul(a, z)?;
    let zb = matmul(z, b)?;
    let mut acc = 0.0;
    for ((x, y), w) in az.as_slice().iter().zip(zb.as_slice()).zip(c.as_slice()) {
        let r = x + y - w;
        acc += r * r;
    }
    Ok(acc.sqrt())
}

/// The collided block with the largest leftover right-hand side.
#[derive(Debug, Clone, Copy)]
struct Collision {
    i: usize,
    j: usize,
    lambda_a: f64,
    lambda_b: f64,
    rhs: f64,
}

fn solve_quasi_triangular(
    ta: &Matrix,
    blocks_a: &[(usize, usize)],
    tb: &Matrix,
    blocks_b: &[(usize, usize)],
    mut f: Matrix,
    pivot_tol: f64,
) -> (Matrix, Option<Collision>) {
    let p = ta.rows();
    let mut y = Matrix::zeros(p, tb.rows());
    let mut worst: Option<Collision> = None;
    // Symmetric inputs give diagonal factors; skip the coupling sweeps then.
    let (a_coupled, b_coupled) = (!is_diagonal(ta), !is_diagonal(tb));

    for &(j0, sj) in blocks_b {
        // F[:, J] -= Y[:, ..j0] Tb[..j0, J]
        for jj in (j0..j0 + sj).filter(|_| b_coupled) {
            for l in 0..j0 {
                let t = tb[(l, jj)];
                if t != 0.0 {
                    let (yl, fj) = (y.col(l), f.col_mut(jj));
                    for (fi, yi) in fj.iter_mut().zip(yl) {
                        *fi -= t * yi;
                    }
                }
            }
        }

        for &(i0, si) in blocks_a.iter().rev() {
            let mut rhs = [0.0; 4];
            for c in 0..sj {
                for r in 0..si {
                    let row = i0 + r;
                    let mut v = f[(row, j0 + c)];
                    if a_coupled {
                        for k in i0 + si..p {
                            v -= ta[(row, k)] * y[(k, j0 + c)];
                        }
                    }
                    rhs[r + si * c] = v;
                }
            }

            let m = si * sj;
            let mut k = [[0.0; 4]; 4];
            for c in 0..sj {
                for r in 0..si {
                    let eq = r + si * c;
                    for r2 in 0..si {
                        k[eq][r2 + si * c] += ta[(i0 + r, i0 + r2)];
                    }
                    for c2 in 0..sj {
                        k[eq][r + si * c2] += tb[(j0 + c2, j0 + c)];
                    }
                }
            }

            let (sol, leftover) = solve_small(&mut k, &mut rhs, m, pivot_tol);
            if let Some(r) = leftover {
                if worst.map_or(true, |w| r > w.rhs) {
                    worst = Some(Collision {
                        i: i0,
                        j: j0,
                        lambda_a: ta[(i0, i0)],
                        lambda_b: tb[(j0, j0)],
                        rhs: r,
                    });
                }
            }
            for c in 0..sj {
                for r in 0..si {
                    y[(i0 + r, j0 + c)] = sol[r + si * c];
                }
            }
        }
    }
    (y, worst)
}

fn is_diagonal(t: &Matrix) -> bool {
    (0..t.cols()).all(|j| t.col(j).iter().enumerate().all(|(i, &v)| i == j || v == 0.0))
}

/// Gaussian elimination with complete pivoting on an `m`×`m` system
/// (`m <= 4`). Unknowns behind a vanishing pivot are set to zero; the
/// largest leftover right-hand side among those rows is returned with the
/// solution when any pivot vanished.
fn solve_small(
    k: &mut [[f64; 4]; 4],
    rhs: &mut [f64; 4],
    m: usize,
    pivot_tol: f64,
) -> ([f64; 4], Option<f64>) {
    if m == 1 {
        let d = k[0][0];
        if d.abs() <= pivot_tol {
            return ([0.0; 4], Some(rhs[0].abs()));
        }
        return ([rhs[0] / d, 0.0, 0.0, 0.0], None);
    }

    let mut col_perm = [0usize, 1, 2, 3];
    let mut rank = m;
    for step in 0..m {
        let (mut pr, mut pc, mut best) = (step, step, -1.0);
        for r in step..m {
            for c in step..m {
                if k[r][c].abs() > best {
                    best = k[r][c].abs();
                    pr = r;
                    pc = c;
                }
            }
        }
        if best <= pivot_tol {
            rank = step;
            break;
        }
        k.swap(step, pr);
        rhs.swap(step, pr);
        if pc != step {
            for row in k.iter_mut() {
                row.swap(step, pc);
            }
            col_perm.swap(step, pc);
        }
        for r in step + 1..m {
            let factor = k[r][step] / k[step][step];
            if factor != 0.0 {
                for c in step..m {
                    k[r][c] -= factor * k[step][c];
                }
                rhs[r] -= factor * rhs[step];
            }
        }
    }
    let leftover = (rank < m).then(|| rhs[rank..m].iter().fold(0.0f64, |a, v| a.max(v.abs())));

    let mut x = [0.0; 4];
    for step in (0..rank).rev() {
        let mut v = rhs[step];
        for c in step + 1..rank {
            v -= k[step][c] * x[c];
        }
        x[step] = v / k[step][step];
    }
    let mut out = [0.0; 4];
    for (pos, &var) in col_perm.iter().enumerate().take(m) {
        out[var] = x[pos];
    }
    (out, leftover)
}
