//! Self-representation learners.
//!
//! [`fit_flnnsc`] alternates per-sample gradient steps on the network
//! weights `W` (with `H` and `Z` fixed) and an exact `Z` update from the
//! Sylvester equation `HᵀH Z + α Z L = HᵀH`. [`fit_ccsc`] runs the same
//! alternation on a convex combination of that nonlinear representation and
//! the linear one solving `XᵀX Z₂ + α Z₂ L = XᵀX`.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flnn::{expand_batch, ActivationKind, ExpansionKind, NetworkState};
use crate::graph::{laplacian, Laplacian, SimilarityGraph};
use crate::linalg::{matmul, solve_linear, LinalgError, Matrix, SylvesterSolver};

#[derive(Debug, Clone, PartialEq)]
pub struct FlnnscConfig {
    /// Weight of the grouping-effect term `(α/2) Tr(Z L Zᵀ)`.
    pub alpha: f64,
    /// Weight decay `(β/2)‖W‖²_F`.
    pub beta: f64,
    /// Learning rate.
    pub mu: f64,
    /// When set, the rate at outer iteration `t` is `μ / (1 + t / T)`.
    pub mu_decay: Option<f64>,
    pub max_outer_iters: usize,
    /// Full passes over the samples between two `Z` updates.
    pub inner_epochs: usize,
    /// Stop once `‖Z_k - Z_{k-1}‖²_F <= tol`.
    pub tol: f64,
    pub seed: u64,
    pub activation: ActivationKind,
    pub expansion: ExpansionKind,
}

impl Default for FlnnscConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            mu: 1e-2,
            mu_decay: None,
            max_outer_iters: 100,
            inner_epochs: 1,
            tol: 1e-6,
            seed: 0,
            activation: ActivationKind::Tanh,
            expansion: ExpansionKind::Trig2,
        }
    }
}

impl FlnnscConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |name, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
            }
        };
        nonneg("alpha", self.alpha)?;
        nonneg("beta", self.beta)?;
        nonneg("mu", self.mu)?;
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.max_outer_iters == 0 {
            return Err(Error::invalid("max_outer_iters", "must be >= 1"));
        }
        if let Some(t) = self.mu_decay {
            if !(t > 0.0) {
                return Err(Error::invalid("mu_decay", format!("must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    fn rate_at(&self, iteration: usize) -> f64 {
        match self.mu_decay {
            Some(t) => self.mu / (1.0 + iteration as f64 / t),
            None => self.mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcscConfig {
    pub base: FlnnscConfig,
    /// Combination weight in `[0, 1]`; 1 is purely nonlinear.
    pub lambda: f64,
}

impl CcscConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid("lambda", format!("must lie in [0, 1], got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Per-outer-iteration record of a fit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    /// Full objective after the `Z` update.
    pub objective_per_iter: Vec<f64>,
    /// `‖Z_k - Z_{k-1}‖²_F`.
    pub z_delta_per_iter: Vec<f64>,
    /// Seconds spent in each outer iteration.
    pub wall_clock_per_iter: Vec<f64>,
    /// Sylvester residual `‖HᵀH Z + α Z L − HᵀH‖_F` of each `Z` update.
    pub z_residual_per_iter: Vec<f64>,
    /// `½‖H − HZ‖²_F + (α/2)Tr(ZLZᵀ)` with the new `H`, before the `Z` update.
    pub partial_before_per_iter: Vec<f64>,
    /// The same quantity after the `Z` update.
    pub partial_after_per_iter: Vec<f64>,
}

impl SolveTrace {
    pub fn iterations(&self) -> usize {
        self.z_delta_per_iter.len()
    }

    pub fn converged(&self, tol: f64) -> bool {
        self.z_delta_per_iter.last().is_some_and(|&d| d <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub z: Matrix,
    /// CCSC parts: nonlinear `Z₁` and linear `Z₂`, with `z = λZ₁ + (1−λ)Z₂`.
    pub parts: Option<(Matrix, Matrix)>,
}

impl Representation {
    fn single(z: Matrix) -> Self {
        Self { z, parts: None }
    }
}

#[derive(Debug, Clone)]
pub struct Fit {
    pub representation: Representation,
    pub network: NetworkState,
    pub trace: SolveTrace,
}

/// `½‖H − HZ‖²_F + (α/2) Tr(Z L Zᵀ)`.
pub fn partial_objective(h: &Matrix, z: &Matrix, l: &Laplacian, alpha: f64) -> Result<f64> {
    let n = h.cols();
    if z.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            what: "Z side",
            expected: n,
            actual: z.rows(),
        });
    }
    if l.n() != n {
        return Err(Error::DimensionMismatch {
            what: "Laplacian side",
            expected: n,
            actual: l.n(),
        });
    }
    let hz = matmul(h, z)?;
    let fit = 0.5 * h.sub(&hz)?.frobenius_norm_sq();
    let smooth = if alpha == 0.0 {
        0.0
    } else {
        // Tr(Z L Zᵀ) = ½ Σ_ij S_ij ‖z_i − z_j‖² over columns, with S_ij = −L_ij
        let mut acc = 0.0;
        for j in 0..n {
            for i in 0..j {
                let s = -l.l[(i, j)];
                if s != 0.0 {
                    let d: f64 = z.col(i).iter().zip(z.col(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    acc += s * d;
                }
            }
        }
        acc
    };
    Ok(fit + 0.5 * alpha * smooth)
}

/// `½‖H − HZ‖²_F + (α/2)Tr(ZLZᵀ) + (β/2)‖W‖²_F`.
pub fn objective_flnnsc(
    h: &Matrix,
    z: &Matrix,
    w: &Matrix,
    l: &Laplacian,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    Ok(partial_objective(h, z, l, alpha)? + 0.5 * beta * w.frobenius_norm_sq())
}

/// Convex-combination objective:
/// `λ[½‖H − HZ₁‖² + (α/2)Tr(Z₁LZ₁ᵀ)] + (1−λ)[½‖X − XZ₂‖² + (α/2)Tr(Z₂LZ₂ᵀ)] + (β/2)‖W‖²`.
#[allow(clippy::too_many_arguments)]
pub fn objective_ccsc(
    h: &Matrix,
    x: &Matrix,
    z1: &Matrix,
    z2: &Matrix,
    w: &Matrix,
    l: &Laplacian,
    alpha: f64,
    beta: f64,
    lambda: f64,
) -> Result<f64> {
    let nonlinear = partial_objective(h, z1, l, alpha)?;
    let linear = partial_objective(x, z2, l, alpha)?;
    Ok(lambda * nonlinear + (1.0 - lambda) * linear + 0.5 * beta * w.frobenius_norm_sq())
}

/// Exact minimizer of `½‖H − HZ‖²_F + (α/2)Tr(ZLZᵀ)`: solves
/// `HᵀH Z + α Z L = HᵀH`.
pub fn update_z(h: &Matrix, l: &Laplacian, alpha: f64) -> Result<Matrix> {
    if l.n() != h.cols() {
        return Err(Error::DimensionMismatch {
            what: "Laplacian side",
            expected: h.cols(),
            actual: l.n(),
        });
    }
    if !(alpha >= 0.0) {
        return Err(Error::invalid("alpha", format!("must be >= 0, got {alpha}")));
    }
    let solver = SylvesterSolver::new(&l.l.scale(alpha))?;
    Ok(solve_self_representation(&solver, h)?.0)
}

/// Solves `MᵀM Z + B Z = MᵀM` for the prepared `B`, returning `Z` and the residual.
fn solve_self_representation(
    solver: &SylvesterSolver,
    m: &Matrix,
) -> std::result::Result<(Matrix, f64), LinalgError> {
    let gram = m.gram();
    solver.solve_with_residual(&gram, &gram)
}

fn check_inputs(x: &Matrix, graph: &SimilarityGraph) -> Result<()> {
    let n = x.cols();
    if n < 2 {
        return Err(Error::invalid("data", format!("need at least 2 samples, got {n}")));
    }
    if graph.s.rows() != n {
        return Err(Error::DimensionMismatch {
            what: "graph size",
            expected: n,
            actual: graph.s.rows(),
        });
    }
    if !x.is_finite() {
        return Err(Error::invalid("data", "contains non-finite entries"));
    }
    Ok(())
}

/// FLNNSC: alternating per-sample `W` updates and exact `Z` solves.
pub fn fit_flnnsc(x: &Matrix, graph: &SimilarityGraph, cfg: &FlnnscConfig) -> Result<Fit> {
    cfg.validate()?;
    alternate(x, graph, cfg, None)
}

/// CCSC: the FLNNSC alternation with `λ`-scaled weight steps, combined
/// with the linear representation as `Z = λZ₁ + (1−λ)Z₂`.
pub fn fit_ccsc(x: &Matrix, graph: &SimilarityGraph, cfg: &CcscConfig) -> Result<Fit> {
    cfg.validate()?;
    alternate(x, graph, &cfg.base, Some(cfg.lambda))
}

fn alternate(
    x: &Matrix,
    graph: &SimilarityGraph,
    cfg: &FlnnscConfig,
    lambda: Option<f64>,
) -> Result<Fit> {
    check_inputs(x, graph)?;
    let n = x.cols();
    let lap = laplacian(graph);
    let solver = SylvesterSolver::new(&lap.l.scale(cfg.alpha))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = NetworkState::init(
        x.rows(),
        cfg.activation,
        cfg.expansion,
        cfg.mu,
        cfg.beta,
        &mut rng,
    )?;
    let phi = expand_batch(x, cfg.expansion);
    let mut h = net.forward_batch_expanded(&phi);

    // Z₂ depends on X only.
    let z2 = match lambda {
        Some(_) => Some(
            solve_self_representation(&solver, x)
                .map_err(|source| Error::ZUpdate { iteration: 0, source })?
                .0,
        ),
        None => None,
    };
    let step_scale = lambda.unwrap_or(1.0);

    let mut z1 = Matrix::zeros(n, n);
    let mut z = Matrix::zeros(n, n);
    let mut trace = SolveTrace::default();
    let mut order: Vec<usize> = (0..n).collect();

    for iteration in 0..cfg.max_outer_iters {
        let started = Instant::now();
        let rate = cfg.rate_at(iteration) * step_scale;

        for _ in 0..cfg.inner_epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                let phi_i = phi.col(i);
                let h_i = net.forward_expanded(phi_i);
                let grad = net.grad_w_expanded(phi_i, &h_i, &h, z1.col(i))?;
                net.sgd_step_with_rate(&grad, rate)?;
            }
        }
        h = net.forward_batch_expanded(&phi);

        let partial_before = partial_objective(&h, &z1, &lap, cfg.alpha)?;
        let (z1_new, residual) = solve_self_representation(&solver, &h)
            .map_err(|source| Error::ZUpdate { iteration, source })?;
        let partial_after = partial_objective(&h, &z1_new, &lap, cfg.alpha)?;
        z1 = z1_new;

        let (z_new, objective) = match (&z2, lambda) {
            (Some(z2), Some(lam)) => (
                z1.lin_comb(lam, z2, 1.0 - lam)?,
                objective_ccsc(&h, x, &z1, z2, &net.w, &lap, cfg.alpha, cfg.beta, lam)?,
            ),
            _ => (
                z1.clone(),
                partial_after + 0.5 * cfg.beta * net.w.frobenius_norm_sq(),
            ),
        };
        if !objective.is_finite() {
            return Err(Error::NonFiniteObjective { iteration });
        }
        let z_delta = z_new.sub(&z)?.frobenius_norm_sq();
        z = z_new;

        trace.objective_per_iter.push(objective);
        trace.z_delta_per_iter.push(z_delta);
        trace.wall_clock_per_iter.push(started.elapsed().as_secs_f64());
        trace.z_residual_per_iter.push(residual);
        trace.partial_before_per_iter.push(partial_before);
        trace.partial_after_per_iter.push(partial_after);

        if z_delta <= cfg.tol {
            break;
        }
    }

    let representation = match z2 {
        Some(z2) => Representation {
            z,
            parts: Some((z1, z2)),
        },
        None => Representation::single(z),
    };
    Ok(Fit {
        representation,
        network: net,
        trace,
    })
}

/// Least-squares regression baseline: `Z = (XᵀX + λI)⁻¹ XᵀX`.
pub fn fit_lsr(x: &Matrix, lambda_reg: f64) -> Result<Representation> {
    if !(lambda_reg > 0.0 && lambda_reg.is_finite()) {
        return Err(Error::invalid("lambda_reg", format!("must be > 0, got {lambda_reg}")));
    }
    let gram = x.gram();
    let mut lhs = gram.clone();
    for i in 0..lhs.rows() {
        lhs[(i, i)] += lambda_reg;
    }
    Ok(Representation::single(solve_linear(&lhs, &gram)?))
}

/// Linear smooth-representation solve: `XᵀX Z + α Z L = XᵀX`.
pub fn fit_linear_smr(x: &Matrix, graph: &SimilarityGraph, alpha: f64) -> Result<Representation> {
    check_inputs(x, graph)?;
    let lap = laplacian(graph);
    Ok(Representation::single(update_z(x, &lap, alpha)?))
}
