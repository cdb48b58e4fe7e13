//! Functional-link network: trigonometric input expansion, a single
//! `d̂×d̂` weight layer and the per-sample gradient used to train it.
//!
//! Each input coordinate `x` expands to `[x, sin πx, cos πx, sin 2πx, cos 2πx]`.
//! The expanded vector is laid out block by block (all `x`, then all `sin πx`,
//! ...), so `d̂ = 5d`.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpansionKind {
    /// Second-order trigonometric expansion.
    #[default]
    Trig2,
}

impl ExpansionKind {
    pub fn terms(self) -> usize {
        match self {
            ExpansionKind::Trig2 => 5,
        }
    }

    pub fn expanded_dim(self, d: usize) -> usize {
        self.terms() * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ActivationKind {
    #[default]
    Tanh,
    Sigmoid,
    Identity,
}

impl ActivationKind {
    #[inline]
    pub fn value(self, u: f64) -> f64 {
        match self {
            ActivationKind::Tanh => u.tanh(),
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-u).exp()),
            ActivationKind::Identity => u,
        }
    }

    #[inline]
    pub fn derivative(self, u: f64) -> f64 {
        match self {
            ActivationKind::Tanh => {
                let t = u.tanh();
                1.0 - t * t
            }
            ActivationKind::Sigmoid => {
                let s = 1.0 / (1.0 + (-u).exp());
                s * (1.0 - s)
            }
            ActivationKind::Identity => 1.0,
        }
    }
}

/// Functional expansion of one sample.
pub fn expand(x: &[f64], kind: ExpansionKind) -> Vec<f64> {
    let d = x.len();
    let mut out = vec![0.0; kind.expanded_dim(d)];
    expand_into(x, kind, &mut out);
    out
}

fn expand_into(x: &[f64], kind: ExpansionKind, out: &mut [f64]) {
    let d = x.len();
    match kind {
        ExpansionKind::Trig2 => {
            for (i, &v) in x.iter().enumerate() {
                let (s1, c1) = (PI * v).sin_cos();
                let (s2, c2) = (2.0 * PI * v).sin_cos();
                out[i] = v;
                out[d + i] = s1;
                out[2 * d + i] = c1;
                out[3 * d + i] = s2;
                out[4 * d + i] = c2;
            }
        }
    }
}

/// Expands every column of `x`; the result is `5d × n`.
pub fn expand_batch(x: &Matrix, kind: ExpansionKind) -> Matrix {
    let dh = kind.expanded_dim(x.rows());
    let mut out = Matrix::zeros(dh, x.cols());
    for j in 0..x.cols() {
        expand_into(x.col(j), kind, out.col_mut(j));
    }
    out
}

/// Trainable state of the single-layer network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    /// `d̂ × d̂` weights.
    pub w: Matrix,
    pub activation: ActivationKind,
    pub expansion: ExpansionKind,
    /// Learning rate, > 0 for training (0 freezes the weights).
    pub mu: f64,
    /// Weight-decay coefficient.
    pub beta: f64,
}

impl NetworkState {
    /// Weights drawn i.i.d. uniform on `[-1/√d̂, 1/√d̂]`.
    pub fn init<R: Rng + ?Sized>(
        input_dim: usize,
        activation: ActivationKind,
        expansion: ExpansionKind,
        mu: f64,
        beta: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::invalid("mu", format!("must be finite and >= 0, got {mu}")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("must be finite and >= 0, got {beta}")));
        }
        let dh = expansion.expanded_dim(input_dim);
        let bound = 1.0 / (dh.max(1) as f64).sqrt();
        let w = Matrix::from_fn(dh, dh, |_, _| rng.gen_range(-bound..=bound));
        Ok(Self {
            w,
            activation,
            expansion,
            mu,
            beta,
        })
    }

    pub fn with_weights(
        w: Matrix,
        activation: ActivationKind,
        expansion: ExpansionKind,
        mu: f64,
        beta: f64,
    ) -> Result<Self> {
        if !w.is_square() || w.rows() % expansion.terms() != 0 {
            return Err(Error::DimensionMismatch {
                what: "weight matrix side (multiple of expansion terms)",
                expected: expansion.expanded_dim(w.rows() / expansion.terms()),
                actual: w.cols(),
            });
        }
        Ok(Self {
            w,
            activation,
            expansion,
            mu,
            beta,
        })
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.w.rows() / self.expansion.terms()
    }

    pub fn expanded_dim(&self) -> usize {
        self.w.rows()
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "sample dimension",
                expected: self.input_dim(),
                actual: len,
            });
        }
        Ok(())
    }

    /// `W φ(x)` for an already expanded sample.
    fn preactivation(&self, phi: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.w.rows()];
        for (j, &p) in phi.iter().enumerate() {
            if p != 0.0 {
                axpy(p, self.w.col(j), &mut u);
            }
        }
        u
    }

    /// `h = ρ(W φ(x))`.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x.len())?;
        let phi = expand(x, self.expansion);
        Ok(self.forward_expanded(&phi))
    }

    pub(crate) fn forward_expanded(&self, phi: &[f64]) -> Vec<f64> {
        let act = self.activation;
        self.preactivation(phi).into_iter().map(|u| act.value(u)).collect()
    }

    /// Stacks `forward` over the columns of `x` into `H` (`5d × n`).
    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x.rows())?;
        Ok(self.forward_batch_expanded(&expand_batch(x, self.expansion)))
    }

    pub(crate) fn forward_batch_expanded(&self, phi: &Matrix) -> Matrix {
        let act = self.activation;
        crate::linalg::matmul(&self.w, phi)
            .expect("phi rows match W")
            .map(|u| act.value(u))
    }

    /// Gradient of `½‖h_i - H z_i‖² + (β/2)‖W‖²_F` with `H` held fixed:
    /// `((h_i - H z_i) ⊙ ρ'(W φ(x_i))) φ(x_i)ᵀ + β W`.
    pub fn grad_w(&self, x_i: &[f64], h_i: &[f64], h: &Matrix, z_i: &[f64]) -> Result<Matrix> {
        self.check_input(x_i.len())?;
        let phi = expand(x_i, self.expansion);
        self.grad_w_expanded(&phi, h_i, h, z_i)
    }

    pub(crate) fn grad_w_expanded(
        &self,
        phi: &[f64],
        h_i: &[f64],
        h: &Matrix,
        z_i: &[f64],
    ) -> Result<Matrix> {
        let dh = self.expanded_dim();
        if h_i.len() != dh {
            return Err(Error::DimensionMismatch {
                what: "h_i length",
                expected: dh,
                actual: h_i.len(),
            });
        }
        if h.rows() != dh {
            return Err(Error::DimensionMismatch {
                what: "H rows",
                expected: dh,
                actual: h.rows(),
            });
        }
        if z_i.len() != h.cols() {
            return Err(Error::DimensionMismatch {
                what: "z_i length",
                expected: h.cols(),
                actual: z_i.len(),
            });
        }
        let hz = h.mul_vec(z_i)?;
        let act = self.activation;
        let masked: Vec<f64> = self
            .preactivation(phi)
            .iter()
            .zip(h_i.iter().zip(&hz))
            .map(|(&u, (&hi, &hzi))| (hi - hzi) * act.derivative(u))
            .collect();
        let mut g = self.w.scale(self.beta);
        for (j, &pj) in phi.iter().enumerate() {
            if pj != 0.0 {
                axpy(pj, &masked, g.col_mut(j));
            }
        }
        Ok(g)
    }

    /// `W ← W - μ·grad`.
    pub fn sgd_step(&mut self, grad: &Matrix) -> Result<()> {
        self.sgd_step_with_rate(grad, self.mu)
    }

    /// `W ← W - rate·grad`.
    pub fn sgd_step_with_rate(&mut self, grad: &Matrix, rate: f64) -> Result<()> {
        if grad.shape() != self.w.shape() {
            return Err(Error::DimensionMismatch {
                what: "gradient side",
                expected: self.w.rows(),
                actual: grad.rows(),
            });
        }
        for (w, g) in self.w.as_mut_slice().iter_mut().zip(grad.as_slice()) {
            *w -= rate * g;
        }
        Ok(())
    }
}

/// `½‖h_i - H z_i‖²` for a sample, with `h_i` recomputed from the network.
pub fn sample_fit_loss(net: &NetworkState, x_i: &[f64], h: &Matrix, z_i: &[f64]) -> Result<f64> {
    let h_i = net.forward(x_i)?;
    let hz = h.mul_vec(z_i)?;
    let r: Vec<f64> = h_i.iter().zip(&hz).map(|(a, b)| a - b).collect();
    Ok(0.5 * dot(&r, &r))
}
