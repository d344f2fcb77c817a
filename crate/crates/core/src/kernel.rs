//! Twice-differentiable positive-definite kernels.
//!
//! Derivative maps need three evaluations per pair of points: the kernel
//! itself, its gradient with respect to the first argument, and the mixed
//! second derivative `∂_{1,i} ∂_{2,j} k(x, y)`. The [`Kernel`] trait exposes
//! exactly these; [`GaussianKernel`] is the only implementation.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Squared distances switch to compensated summation above this dimension.
const COMPENSATED_DIM: usize = 64;

pub trait Kernel: Send + Sync {
    /// `k(x, y)`.
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    /// Gradient of `k(·, y)` at `x`.
    fn grad1(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>>;

    /// Row-major `d × d` matrix with entry `(i, j) = ∂_{1,i} ∂_{2,j} k(x, y)`.
    fn cross_hessian(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>>;
}

/// `k(x, y) = exp(-‖x - y‖² / (2σ²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernel {
    sigma: f64,
}

impl GaussianKernel {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "kernel bandwidth must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Kernel value from a precomputed squared distance.
    #[inline]
    pub fn from_sq_dist(&self, sq: f64) -> f64 {
        (-sq / (2.0 * self.sigma * self.sigma)).exp()
    }

    // The unchecked variants below are used by the assembly loops, which
    // validate the whole dataset once up front.

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.from_sq_dist(sq_dist(x, y))
    }

    /// Writes `∂_{1,j} k(x, y)` into `out[j]` and returns `k(x, y)`.
    #[inline]
    pub(crate) fn grad1_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        let k = self.eval_unchecked(x, y);
        let s2 = self.sigma * self.sigma;
        for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
            *o = -(xi - yi) / s2 * k;
        }
        k
    }

    pub(crate) fn cross_hessian_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let d = x.len();
        let k = self.eval_unchecked(x, y);
        let s2 = self.sigma * self.sigma;
        let s4 = s2 * s2;
        for i in 0..d {
            let di = x[i] - y[i];
            for j in 0..d {
                let dj = x[j] - y[j];
                let diag = if i == j { 1.0 / s2 } else { 0.0 };
                out[i * d + j] = (diag - di * dj / s4) * k;
            }
        }
    }
}

impl Kernel for GaussianKernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_pair(x, y)?;
        Ok(self.eval_unchecked(x, y))
    }

    fn grad1(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_pair(x, y)?;
        let mut out = vec![0.0; x.len()];
        self.grad1_into(x, y, &mut out);
        Ok(out)
    }

    fn cross_hessian(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_pair(x, y)?;
        let mut out = vec![0.0; x.len() * x.len()];
        self.cross_hessian_into(x, y, &mut out);
        Ok(out)
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("points must have dimension >= 1"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coordinate in kernel input"));
    }
    Ok(())
}

/// Squared Euclidean distance. Kahan-compensated for large dimensions.
#[inline]
pub fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    if x.len() <= COMPENSATED_DIM {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    } else {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (a, b) in x.iter().zip(y) {
            let term = (a - b) * (a - b) - comp;
            let t = sum + term;
            comp = (t - sum) - term;
            sum = t;
        }
        sum
    }
}
