//! Comparison methods: harmonic label propagation on a dense Gaussian graph
//! and kernel ridge regression on the labeled points alone.

use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::estimator::{BasisKind, FittedModel};
use crate::kernel::{sq_dist, GaussianKernel};
use crate::pencil::solve_spd_jittered;
use faer::Mat;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphConfig {
    sigma: f64,
}

impl GraphConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "graph bandwidth must be positive, got {sigma}"
            )));
        }
        Ok(Self { sigma })
    }

    /// Uses [`graph_bandwidth`] for a dataset of `n` points in dimension `d`.
    pub fn auto(n: usize, d: usize) -> Result<Self> {
        Self::new(graph_bandwidth(n, d)?)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `n^{-1/(d+4)} ln n`.
pub fn graph_bandwidth(n: usize, d: usize) -> Result<f64> {
    if n < 2 || d == 0 {
        return Err(Error::invalid(format!(
            "graph bandwidth needs n >= 2 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    let nf = n as f64;
    Ok(nf.powf(-1.0 / (d as f64 + 4.0)) * nf.ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicResult {
    /// Values on the unlabeled rows, in dataset order.
    pub values: Vec<f64>,
    /// The unlabeled block was singular and needed the diagonal shift.
    pub regularized: bool,
}

/// Harmonic solution `f_u = (D_uu - W_uu)⁻¹ W_uℓ y_ℓ` on the complete graph
/// with weights `exp(-‖Xᵢ - Xⱼ‖² / 2σ²)` and no self-loops.
pub fn harmonic_propagate(ds: &SemiDataset, g: &GraphConfig) -> Result<HarmonicResult> {
    let (n, nl) = (ds.n(), ds.n_labeled());
    if n <= nl {
        return Err(Error::invalid("harmonic propagation needs at least one unlabeled point"));
    }
    let u = n - nl;
    let k = GaussianKernel::new(g.sigma)?;

    // Unlabeled block of the Laplacian and W_uℓ y_ℓ, built row by row.
    let mut lap = Mat::<f64>::zeros(u, u);
    let mut rhs = vec![0.0; u];
    for r in 0..u {
        let i = nl + r;
        let xi = ds.row(i);
        let mut degree = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let w = k.from_sq_dist(sq_dist(xi, ds.row(j)));
            degree += w;
            if j < nl {
                rhs[r] += w * ds.labels()[j];
            } else {
                lap[(r, j - nl)] = -w;
            }
        }
        lap[(r, r)] = degree;
    }
    let (values, regularized) = solve_spd_jittered(lap.as_ref(), &rhs)?;
    Ok(HarmonicResult {
        values,
        regularized,
    })
}

/// Kernel ridge regression on the labeled prefix:
/// `(K_ℓℓ + n_ℓ · ridge · I) c = y`.
pub fn krr_fit(ds: &SemiDataset, k: &GaussianKernel, ridge: f64) -> Result<FittedModel> {
    if !(ridge.is_finite() && ridge > 0.0) {
        return Err(Error::invalid(format!("ridge must be positive, got {ridge}")));
    }
    let nl = ds.n_labeled();
    let shift = nl as f64 * ridge;
    let gram = Mat::from_fn(nl, nl, |i, j| {
        k.eval_unchecked(ds.row(i), ds.row(j)) + if i == j { shift } else { 0.0 }
    });
    let (coefficients, _) = solve_spd_jittered(gram.as_ref(), ds.labels())?;
    FittedModel::new(
        *k,
        BasisKind::LandmarkKernel,
        ds.labeled_inputs().to_vec(),
        ds.d(),
        coefficients,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_examples() {
        let v = graph_bandwidth(7, 1).unwrap();
        assert!((v - 7f64.powf(-0.2) * 7f64.ln()).abs() < 1e-15);
        // ≈ 1.3186; the rounded worked value 1.32 is within 2e-3.
        assert!((v - 1.3186).abs() < 1e-4);
        let v = graph_bandwidth(2, 1).unwrap();
        assert!((v - 0.6035).abs() < 1e-3);
        assert!(graph_bandwidth(1, 1).is_err());
        let mut prev = 0.0;
        for d in [1, 5, 50, 500, 5000] {
            let v = graph_bandwidth(100, d).unwrap();
            assert!(v > prev && v < 100f64.ln());
            prev = v;
        }
    }

    #[test]
    fn middle_point_is_average() {
        let ds = SemiDataset::new(vec![-1.0, 1.0, 0.0], 1, vec![-1.0, 1.0]).unwrap();
        let r = harmonic_propagate(&ds, &GraphConfig::new(0.8).unwrap()).unwrap();
        assert!(r.values[0].abs() < 1e-15);
        assert!(!r.regularized);
    }

    #[test]
    fn three_node_hand_solve() {
        // Unlabeled node at 0.3 between labels at 0 (y=2) and 1 (y=-1).
        let ds = SemiDataset::new(vec![0.0, 1.0, 0.3], 1, vec![2.0, -1.0]).unwrap();
        let sigma = 0.5;
        let r = harmonic_propagate(&ds, &GraphConfig::new(sigma).unwrap()).unwrap();
        let w1 = (-0.09f64 / (2.0 * sigma * sigma)).exp();
        let w2 = (-0.49f64 / (2.0 * sigma * sigma)).exp();
        let expect = (w1 * 2.0 - w2) / (w1 + w2);
        assert!((r.values[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn constants_are_harmonic() {
        let x: Vec<f64> = (0..30).map(|i| (i as f64 * 1.3).sin()).collect();
        let ds = SemiDataset::new(x, 2, vec![0.7; 4]).unwrap();
        let r = harmonic_propagate(&ds, &GraphConfig::new(0.5).unwrap()).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.7).abs() < 1e-8));
    }

    #[test]
    fn isolated_unlabeled_point_is_regularized() {
        let ds = SemiDataset::new(vec![0.0, 0.1, 1000.0], 1, vec![1.0, 1.0]).unwrap();
        let r = harmonic_propagate(&ds, &GraphConfig::new(0.5).unwrap()).unwrap();
        assert!(r.regularized);
        assert!(r.values[0].is_finite());
    }

    #[test]
    fn needs_unlabeled_points() {
        let ds = SemiDataset::new(vec![0.0, 1.0], 1, vec![1.0, 1.0]).unwrap();
        assert!(harmonic_propagate(&ds, &GraphConfig::new(1.0).unwrap()).is_err());
    }

    #[test]
    fn krr_examples() {
        let k = GaussianKernel::new(0.5).unwrap();
        let ds = SemiDataset::new(vec![0.2, 9.0], 1, vec![3.0]).unwrap();
        let m = krr_fit(&ds, &k, 1e-12).unwrap();
        assert!((m.predict_one(&[0.2]).unwrap() - 3.0).abs() < 1e-9);
        let m = krr_fit(&ds, &k, 1e12).unwrap();
        assert!(m.coefficients()[0].abs() < 1e-11);

        let ds = SemiDataset::new(vec![-1.0, 1.0, 0.3], 1, vec![-1.0, 1.0]).unwrap();
        let m = krr_fit(&ds, &k, 0.1).unwrap();
        assert!(m.predict_one(&[0.0]).unwrap().abs() < 1e-15);
        assert!(krr_fit(&ds, &k, 0.0).is_err());
    }
}
