//! Spectral filters applied to generalized eigenvalues.

use crate::error::{Error, Result};
use crate::pencil::PencilDecomposition;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    /// `ψ(x) = 1 / (x + λ)`.
    Tikhonov,
    /// `ψ(x) = 1/x` if `x > λ`, else 0.
    Cutoff,
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tikhonov" => Ok(FilterKind::Tikhonov),
            "cutoff" => Ok(FilterKind::Cutoff),
            other => Err(Error::invalid(format!("unknown filter '{other}'"))),
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Tikhonov => "tikhonov",
            FilterKind::Cutoff => "cutoff",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    kind: FilterKind,
    lambda: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!(
                "filter lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    pub fn tikhonov(lambda: f64) -> Result<Self> {
        Self::new(FilterKind::Tikhonov, lambda)
    }

    pub fn cutoff(lambda: f64) -> Result<Self> {
        Self::new(FilterKind::Cutoff, lambda)
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!(
                "filters are defined on non-negative values, got {x}"
            )));
        }
        Ok(match self.kind {
            FilterKind::Tikhonov => 1.0 / (x + self.lambda),
            FilterKind::Cutoff if x > self.lambda => 1.0 / x,
            FilterKind::Cutoff => 0.0,
        })
    }
}

/// `c = Σᵢ ψ(λᵢ) uᵢ (uᵢᵀ b)`.
pub fn filter_coefficients(dec: &PencilDecomposition, f: &FilterSpec, b: &[f64]) -> Result<Vec<f64>> {
    let p = dec.dim();
    if b.len() != p {
        return Err(Error::invalid(format!(
            "label vector has length {}, decomposition has order {p}",
            b.len()
        )));
    }
    let u = &dec.eigenvectors;
    let mut c = vec![0.0; p];
    for (i, &ev) in dec.eigenvalues.iter().enumerate() {
        let w = f.apply(ev)?;
        if w == 0.0 {
            continue;
        }
        let col = u.col(i);
        let proj: f64 = (0..p).map(|r| col[r] * b[r]).sum();
        let scale = w * proj;
        for (r, cr) in c.iter_mut().enumerate() {
            *cr += scale * col[r];
        }
    }
    Ok(c)
}
