//! Empirical covariance and Dirichlet-energy operators compressed onto a
//! finite basis.
//!
//! With landmarks `z_1..z_p` the basis is `{k(·, z_i)}` and, for a dataset
//! `X_1..X_n` with labels on the first `n_ℓ` rows,
//!
//! ```text
//! Knp[l, i]       = k(X_l, z_i)
//! Znp[l·d + j, i] = ∂_{1,j} k(X_l, z_i)
//! A = Knpᵀ Knp / n
//! B = Znpᵀ Znp / n + μ · Kpp
//! b = Σ_{l < n_ℓ} Y_l Knp[l, ·] / n_ℓ
//! ```
//!
//! where `Kpp` is the landmark Gram matrix. The dense variant uses the full
//! `n(d+1)` representer basis `{k_{X_i}} ∪ {∂_j k_{X_i}}` instead.

use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use faer::Mat;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default bound on `n(d+1)` for [`assemble_dense`].
pub const DEFAULT_DENSE_CAP: usize = 2000;

/// Points per block when the low-memory mode streams `ZᵀZ`.
const STREAM_BLOCK: usize = 256;

/// Which points the covariance term averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceAveraging {
    /// All `n` points, as in the spectral-filtering formulation.
    #[default]
    AllPoints,
    /// The `n_ℓ` labeled points only; this makes the estimator the exact
    /// empirical risk minimizer.
    Labeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssembleOptions {
    pub averaging: CovarianceAveraging,
    /// Stream the derivative block and drop `Knp`/`Znp` after use.
    pub low_memory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    indices: Vec<usize>,
    coordinates: Vec<f64>,
    d: usize,
}

impl LandmarkSet {
    /// Landmarks at explicit dataset rows.
    pub fn from_indices(ds: &SemiDataset, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.len() > ds.n() {
            return Err(Error::invalid(format!(
                "need 1 <= p <= n landmarks, got {} with n = {}",
                indices.len(),
                ds.n()
            )));
        }
        let mut seen = vec![false; ds.n()];
        for &i in &indices {
            if i >= ds.n() {
                return Err(Error::invalid(format!("landmark index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::invalid(format!("duplicate landmark index {i}")));
            }
        }
        let coordinates = indices.iter().flat_map(|&i| ds.row(i).to_vec()).collect();
        Ok(Self {
            indices,
            coordinates,
            d: ds.d(),
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Row-major `p × d`.
    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coordinates[i * self.d..(i + 1) * self.d]
    }
}

/// Draws `p` distinct rows uniformly without replacement (ChaCha8 seeded
/// with `seed`).
pub fn select_landmarks(ds: &SemiDataset, p: usize, seed: u64) -> Result<LandmarkSet> {
    if p == 0 || p > ds.n() {
        return Err(Error::invalid(format!(
            "need 1 <= p <= n landmarks, got p = {p} with n = {}",
            ds.n()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = index::sample(&mut rng, ds.n(), p).into_vec();
    LandmarkSet::from_indices(ds, indices)
}

#[derive(Debug, Clone)]
pub struct OperatorBundle {
    /// Basis evaluations at every data point (`n × p`); `None` in
    /// low-memory mode.
    pub knp: Option<Mat<f64>>,
    /// Basis gradients at every data point (`nd × p`, point-major rows).
    pub znp: Option<Mat<f64>>,
    /// Gram matrix of the basis in the RKHS.
    pub kpp: Mat<f64>,
    pub a: Mat<f64>,
    pub b: Mat<f64>,
    pub rhs: Vec<f64>,
    pub mu: f64,
    /// Filter strength the bundle is intended for, if already chosen.
    pub lambda_weight: Option<f64>,
}

impl OperatorBundle {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }
}

pub fn assemble(
    ds: &SemiDataset,
    k: &GaussianKernel,
    lm: &LandmarkSet,
    mu: f64,
) -> Result<OperatorBundle> {
    assemble_with(ds, k, lm, mu, AssembleOptions::default())
}

pub fn assemble_with(
    ds: &SemiDataset,
    k: &GaussianKernel,
    lm: &LandmarkSet,
    mu: f64,
    opts: AssembleOptions,
) -> Result<OperatorBundle> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("mu must be positive, got {mu}")));
    }
    if lm.d != ds.d() || lm.indices.iter().any(|&i| i >= ds.n()) {
        return Err(Error::invalid("landmark set does not belong to this dataset"));
    }
    let (n, d, p) = (ds.n(), ds.d(), lm.len());

    let mut knp = Mat::<f64>::zeros(n, p);
    for l in 0..n {
        let x = ds.row(l);
        for i in 0..p {
            let v = k.eval_unchecked(x, lm.point(i));
            if !v.is_finite() {
                return Err(non_finite(l, i));
            }
            knp[(l, i)] = flush(v);
        }
    }

    let fill_gradients = |z: &mut Mat<f64>, rows: std::ops::Range<usize>| -> Result<()> {
        let mut g = vec![0.0; d];
        for (local, l) in rows.enumerate() {
            let x = ds.row(l);
            for i in 0..p {
                k.grad1_into(x, lm.point(i), &mut g);
                for (j, gj) in g.iter().enumerate() {
                    if !gj.is_finite() {
                        return Err(non_finite(l, i));
                    }
                    z[(local * d + j, i)] = flush(*gj);
                }
            }
        }
        Ok(())
    };

    let (lap, znp) = if opts.low_memory {
        let mut acc = Mat::<f64>::zeros(p, p);
        let mut start = 0;
        while start < n {
            let end = (start + STREAM_BLOCK).min(n);
            let mut z = Mat::<f64>::zeros((end - start) * d, p);
            fill_gradients(&mut z, start..end)?;
            acc += z.transpose() * &z;
            start = end;
        }
        (acc, None)
    } else {
        let mut z = Mat::<f64>::zeros(n * d, p);
        fill_gradients(&mut z, 0..n)?;
        (z.transpose() * &z, Some(z))
    };

    let kpp = Mat::from_fn(p, p, |r, c| knp[(lm.indices[r], c)]);
    let a = covariance(&knp, ds.n_labeled(), opts.averaging);
    let b = symmetrize(&Mat::from_fn(p, p, |r, c| lap[(r, c)] / n as f64 + mu * kpp[(r, c)]));
    let rhs = label_moment(&knp, ds.labels());

    Ok(OperatorBundle {
        knp: (!opts.low_memory).then_some(knp),
        znp,
        kpp,
        a,
        b,
        rhs,
        mu,
        lambda_weight: None,
    })
}

/// Exact operators on the `n(d+1)` representer basis, ordered point-major:
/// index `i(d+1)` is `k_{X_i}` and `i(d+1) + 1 + j` is `∂_j k_{X_i}`.
pub fn assemble_dense(ds: &SemiDataset, k: &GaussianKernel, mu: f64) -> Result<OperatorBundle> {
    assemble_dense_with(ds, k, mu, DEFAULT_DENSE_CAP, CovarianceAveraging::AllPoints)
}

pub fn assemble_dense_with(
    ds: &SemiDataset,
    k: &GaussianKernel,
    mu: f64,
    cap: usize,
    averaging: CovarianceAveraging,
) -> Result<OperatorBundle> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mu must be non-negative, got {mu}")));
    }
    let (n, d) = (ds.n(), ds.d());
    let m = n * (d + 1);
    if m > cap {
        return Err(Error::ResourceLimit(format!(
            "dense representer basis has dimension {m} > cap {cap}; use the landmark assembly instead"
        )));
    }
    let w = d + 1;
    let mut grad = vec![0.0; d];
    let mut hess = vec![0.0; d * d];

    // Gram of the basis. Entry ((i,a),(i',b)):
    //   a=0,b=0: k(X_i, X_i')
    //   a=0,b>0: ∂_{1,b} k(X_i', X_i)
    //   a>0,b=0: ∂_{1,a} k(X_i, X_i')
    //   a>0,b>0: ∂_{1,a} ∂_{2,b} k(X_i, X_i')
    let mut gram = Mat::<f64>::zeros(m, m);
    for i in 0..n {
        for ip in 0..n {
            let (xi, xj) = (ds.row(i), ds.row(ip));
            let kv = k.grad1_into(xi, xj, &mut grad);
            gram[(i * w, ip * w)] = flush(kv);
            for a in 0..d {
                gram[(i * w + 1 + a, ip * w)] = flush(grad[a]);
                // ∂_{1,a} k(X_i', X_i) = -∂_{1,a} k(X_i, X_i') for the Gaussian.
                gram[(i * w, ip * w + 1 + a)] = flush(-grad[a]);
            }
            k.cross_hessian_into(xi, xj, &mut hess);
            for a in 0..d {
                for b in 0..d {
                    gram[(i * w + 1 + a, ip * w + 1 + b)] = flush(hess[a * d + b]);
                }
            }
        }
    }
    if let Some((r, c)) = first_non_finite(&gram) {
        return Err(non_finite(r / w, c / w));
    }

    // Basis evaluated at data point X_l is the column block of the Gram at
    // the k_{X_l} row.
    let knp = Mat::from_fn(n, m, |l, c| gram[(l * w, c)]);

    // Gradient of each basis function at X_l, coordinate t:
    //   k_{X_i}:      ∂_{2,t} k(X_i, X_l)           = gram[(i·w + 0, l·w + 1 + t)]
    //   ∂_a k_{X_i}:  ∂_{1,a} ∂_{2,t} k(X_i, X_l)   = gram[(i·w + 1 + a, l·w + 1 + t)]
    let znp = Mat::from_fn(n * d, m, |row, c| {
        let (l, t) = (row / d, row % d);
        gram[(c, l * w + 1 + t)]
    });

    let lap = znp.transpose() * &znp;
    let a = covariance(&knp, ds.n_labeled(), averaging);
    let b = symmetrize(&Mat::from_fn(m, m, |r, c| lap[(r, c)] / n as f64 + mu * gram[(r, c)]));
    let rhs = label_moment(&knp, ds.labels());
    Ok(OperatorBundle {
        knp: Some(knp),
        znp: Some(znp),
        kpp: gram,
        a,
        b,
        rhs,
        mu,
        lambda_weight: None,
    })
}

/// Entries below this magnitude are stored as zero. Far-apart points give
/// kernel values deep in the subnormal range, and subnormal arithmetic slows
/// the Gram products by an order of magnitude; above the floor no product of
/// two entries can underflow.
const UNDERFLOW_FLOOR: f64 = 1e-150;

fn flush(v: f64) -> f64 {
    if v.abs() < UNDERFLOW_FLOOR {
        0.0
    } else {
        v
    }
}

fn covariance(knp: &Mat<f64>, n_labeled: usize, averaging: CovarianceAveraging) -> Mat<f64> {
    let rows = match averaging {
        CovarianceAveraging::AllPoints => knp.nrows(),
        CovarianceAveraging::Labeled => n_labeled,
    };
    let view = knp.as_ref().subrows(0, rows);
    let g = view.transpose() * view;
    let scale = 1.0 / rows as f64;
    symmetrize(&Mat::from_fn(g.nrows(), g.ncols(), |r, c| g[(r, c)] * scale))
}

fn label_moment(knp: &Mat<f64>, labels: &[f64]) -> Vec<f64> {
    let nl = labels.len() as f64;
    (0..knp.ncols())
        .map(|c| labels.iter().enumerate().map(|(l, y)| y * knp[(l, c)]).sum::<f64>() / nl)
        .collect()
}

fn symmetrize(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| 0.5 * (m[(r, c)] + m[(c, r)]))
}

fn first_non_finite(m: &Mat<f64>) -> Option<(usize, usize)> {
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Some((r, c));
            }
        }
    }
    None
}

fn non_finite(row: usize, landmark: usize) -> Error {
    Error::NumericalConsistency(format!(
        "non-finite kernel value at data row {row}, basis point {landmark}"
    ))
}
