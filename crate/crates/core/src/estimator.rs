//! Fitting, prediction and decoding.
//!
//! [`fit`] is the landmark estimator: pick `p` landmarks, assemble the
//! compressed operators, decompose the pencil `(A, B)` and filter the label
//! moment `b` through the generalized spectrum. [`fit_exact`] solves the same
//! Tikhonov problem on the full `n(d+1)` representer basis and is the
//! reference the landmark estimator is measured against.

use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::filters::{filter_coefficients, FilterSpec};
use crate::kernel::GaussianKernel;
use crate::operators::{
    assemble_dense_with, assemble_with, select_landmarks, AssembleOptions, CovarianceAveraging,
    LandmarkSet, OperatorBundle, DEFAULT_DENSE_CAP,
};
use crate::pencil::{gevd, solve_spd_jittered, PencilDecomposition};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// `g(x) = Σᵢ cᵢ k(x, zᵢ)`.
    LandmarkKernel,
    /// `g(x) = Σᵢ cᵢ₀ k(Xᵢ, x) + Σᵢⱼ cᵢⱼ ∂_{1,j} k(Xᵢ, x)`, coefficients
    /// stored point-major with stride `d + 1`.
    DenseRepresenter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    kernel: GaussianKernel,
    basis_kind: BasisKind,
    coordinates: Vec<f64>,
    d: usize,
    coefficients: Vec<f64>,
    clip_bound: Option<f64>,
}

/// On-disk JSON layout of a [`FittedModel`].
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    kernel_sigma: f64,
    basis_kind: BasisKind,
    clip_bound: Option<f64>,
    coordinates: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
}

impl FittedModel {
    pub fn new(
        kernel: GaussianKernel,
        basis_kind: BasisKind,
        coordinates: Vec<f64>,
        d: usize,
        coefficients: Vec<f64>,
        clip_bound: Option<f64>,
    ) -> Result<Self> {
        if d == 0 || coordinates.is_empty() || coordinates.len() % d != 0 {
            return Err(Error::invalid("model coordinates must be a non-empty m × d matrix"));
        }
        let m = coordinates.len() / d;
        let expected = match basis_kind {
            BasisKind::LandmarkKernel => m,
            BasisKind::DenseRepresenter => m * (d + 1),
        };
        if coefficients.len() != expected {
            return Err(Error::invalid(format!(
                "{basis_kind:?} model over {m} points needs {expected} coefficients, got {}",
                coefficients.len()
            )));
        }
        if coordinates.iter().chain(&coefficients).any(|v| !v.is_finite()) {
            return Err(Error::NumericalConsistency("non-finite model parameter".into()));
        }
        if let Some(c) = clip_bound {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("clip bound must be non-negative, got {c}")));
            }
        }
        Ok(Self {
            kernel,
            basis_kind,
            coordinates,
            d,
            coefficients,
            clip_bound,
        })
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn basis_kind(&self) -> BasisKind {
        self.basis_kind
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn clip_bound(&self) -> Option<f64> {
        self.clip_bound
    }

    pub fn set_clip_bound(&mut self, bound: Option<f64>) {
        self.clip_bound = bound;
    }

    fn num_points(&self) -> usize {
        self.coordinates.len() / self.d
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coordinates[i * self.d..(i + 1) * self.d]
    }

    /// Score at one point.
    pub fn predict_one(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::invalid(format!(
                "query has dimension {}, model expects {}",
                x.len(),
                self.d
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite query coordinate"));
        }
        Ok(self.score(x))
    }

    /// Scores for a row-major `q × d` batch.
    pub fn predict(&self, queries: &[f64]) -> Result<Vec<f64>> {
        if queries.len() % self.d != 0 {
            return Err(Error::invalid(format!(
                "query buffer of length {} is not a multiple of d = {}",
                queries.len(),
                self.d
            )));
        }
        queries.chunks(self.d).map(|x| self.predict_one(x)).collect()
    }

    fn score(&self, x: &[f64]) -> f64 {
        let raw = match self.basis_kind {
            BasisKind::LandmarkKernel => (0..self.num_points())
                .map(|i| self.coefficients[i] * self.kernel.eval_unchecked(x, self.point(i)))
                .sum(),
            BasisKind::DenseRepresenter => {
                let w = self.d + 1;
                let mut grad = vec![0.0; self.d];
                let mut total = 0.0;
                for i in 0..self.num_points() {
                    let c = &self.coefficients[i * w..(i + 1) * w];
                    // ∂_{1,j} k(Xᵢ, x) with Xᵢ in the first slot.
                    let kv = self.kernel.grad1_into(self.point(i), x, &mut grad);
                    total += c[0] * kv + c[1..].iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();
                }
                total
            }
        };
        match self.clip_bound {
            Some(c) => raw.clamp(-c, c),
            None => raw,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDocument {
            kernel_sigma: self.kernel.sigma(),
            basis_kind: self.basis_kind,
            clip_bound: self.clip_bound,
            coordinates: self.coordinates.chunks(self.d).map(<[f64]>::to_vec).collect(),
            coefficients: self.coefficients.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let d = doc.coordinates.first().map_or(0, Vec::len);
        if doc.coordinates.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("ragged coordinate rows in model document"));
        }
        Self::new(
            GaussianKernel::new(doc.kernel_sigma)?,
            doc.basis_kind,
            doc.coordinates.into_iter().flatten().collect(),
            d,
            doc.coefficients,
            doc.clip_bound,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    pub averaging: CovarianceAveraging,
    /// Clip predictions to `[-c_Y, c_Y]` with `c_Y = max |Yᵢ|`.
    pub clip: bool,
    pub low_memory: bool,
}

/// Everything [`fit_detailed`] computed on the way to the model.
#[derive(Debug, Clone)]
pub struct FitArtifacts {
    pub model: FittedModel,
    pub landmarks: LandmarkSet,
    pub bundle: OperatorBundle,
    pub decomposition: PencilDecomposition,
}

/// Landmark estimator with default options.
pub fn fit(
    ds: &SemiDataset,
    k: &GaussianKernel,
    p: usize,
    mu: f64,
    filter: &FilterSpec,
    seed: u64,
) -> Result<FittedModel> {
    fit_detailed(ds, k, p, mu, filter, seed, FitOptions::default()).map(|a| a.model)
}

pub fn fit_with(
    ds: &SemiDataset,
    k: &GaussianKernel,
    p: usize,
    mu: f64,
    filter: &FilterSpec,
    seed: u64,
    opts: FitOptions,
) -> Result<FittedModel> {
    fit_detailed(ds, k, p, mu, filter, seed, opts).map(|a| a.model)
}

pub fn fit_detailed(
    ds: &SemiDataset,
    k: &GaussianKernel,
    p: usize,
    mu: f64,
    filter: &FilterSpec,
    seed: u64,
    opts: FitOptions,
) -> Result<FitArtifacts> {
    let landmarks = select_landmarks(ds, p, seed)?;
    let mut bundle = assemble_with(
        ds,
        k,
        &landmarks,
        mu,
        AssembleOptions {
            averaging: opts.averaging,
            low_memory: opts.low_memory,
        },
    )?;
    bundle.lambda_weight = Some(filter.lambda());
    let decomposition = gevd(bundle.a.as_ref(), bundle.b.as_ref())?;
    let coefficients = filter_coefficients(&decomposition, filter, &bundle.rhs)?;
    let model = FittedModel::new(
        *k,
        BasisKind::LandmarkKernel,
        landmarks.coordinates().to_vec(),
        ds.d(),
        coefficients,
        opts.clip.then(|| label_bound(ds)),
    )?;
    Ok(FitArtifacts {
        model,
        landmarks,
        bundle,
        decomposition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub cap: usize,
    pub averaging: CovarianceAveraging,
    pub clip: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_DENSE_CAP,
            averaging: CovarianceAveraging::Labeled,
            clip: false,
        }
    }
}

/// Exact Tikhonov minimizer over the full representer basis, solved as
/// `(A + λB) c = b`.
pub fn fit_exact(ds: &SemiDataset, k: &GaussianKernel, lambda: f64, mu: f64) -> Result<FittedModel> {
    fit_exact_with(ds, k, lambda, mu, ExactOptions::default())
}

pub fn fit_exact_with(
    ds: &SemiDataset,
    k: &GaussianKernel,
    lambda: f64,
    mu: f64,
    opts: ExactOptions,
) -> Result<FittedModel> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let bundle = assemble_dense_with(ds, k, mu, opts.cap, opts.averaging)?;
    let m = bundle.dim();
    let system = faer::Mat::from_fn(m, m, |r, c| bundle.a[(r, c)] + lambda * bundle.b[(r, c)]);
    let (coefficients, _) = solve_spd_jittered(system.as_ref(), &bundle.rhs)?;
    FittedModel::new(
        *k,
        BasisKind::DenseRepresenter,
        ds.inputs().to_vec(),
        ds.d(),
        coefficients,
        opts.clip.then(|| label_bound(ds)),
    )
}

fn label_bound(ds: &SemiDataset) -> f64 {
    ds.labels().iter().fold(0.0, |m, y| m.max(y.abs()))
}

/// `+1` where the score is `>= 0`, `-1` otherwise.
pub fn decode_sign(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub lambda0: f64,
    pub mu0: f64,
    pub p0: f64,
    /// Eigenvalue-decay exponent, in `(0, 1]`.
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub lambda: f64,
    pub mu: f64,
    pub p: usize,
}

/// `λ = λ₀ n^{-1/4}`, `μ = μ₀ n^{-1/4}`, `p = min(n, ⌈p₀ n^s ln n⌉)` with
/// `s = max(1/2, 1/(4a))`.
pub fn schedule(n: usize, sp: &ScheduleParams) -> Result<Schedule> {
    if n < 2 {
        return Err(Error::invalid(format!("schedule needs n >= 2, got {n}")));
    }
    if !(sp.a > 0.0 && sp.a <= 1.0) {
        return Err(Error::invalid(format!("decay exponent must lie in (0, 1], got {}", sp.a)));
    }
    for (v, name) in [(sp.lambda0, "lambda0"), (sp.mu0, "mu0"), (sp.p0, "p0")] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let nf = n as f64;
    let shrink = nf.powf(-0.25);
    let s = f64::max(0.5, 1.0 / (4.0 * sp.a));
    let p = (sp.p0 * nf.powf(s) * nf.ln()).ceil() as usize;
    Ok(Schedule {
        lambda: sp.lambda0 * shrink,
        mu: sp.mu0 * shrink,
        p: p.clamp(1, n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kern(s: f64) -> GaussianKernel {
        GaussianKernel::new(s).unwrap()
    }

    #[test]
    fn one_point_hand_trace() {
        let ds = SemiDataset::new(vec![0.0], 1, vec![2.0]).unwrap();
        let model = fit(&ds, &kern(1.0), 1, 0.5, &FilterSpec::tikhonov(1.0).unwrap(), 0).unwrap();
        assert!((model.coefficients()[0] - 4.0 / 3.0).abs() < 1e-14);
        assert!((model.predict_one(&[0.0]).unwrap() - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn zero_labels_give_zero_model() {
        let ds = SemiDataset::new((0..20).map(|i| i as f64 * 0.1).collect(), 2, vec![0.0; 3]).unwrap();
        let model = fit(&ds, &kern(0.5), 6, 0.1, &FilterSpec::tikhonov(1.0).unwrap(), 1).unwrap();
        assert!(model.coefficients().iter().all(|&c| c == 0.0));
        assert!(model.predict(ds.inputs()).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn prediction_examples() {
        let m = FittedModel::new(kern(1.0), BasisKind::LandmarkKernel, vec![0.0, 1.0, 2.0, 3.0], 2, vec![0.0, 0.0], None)
            .unwrap();
        assert_eq!(m.predict(&[5.0, 5.0, -1.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let m = FittedModel::new(kern(1.0), BasisKind::LandmarkKernel, vec![0.0, 1.0, 2.0, 3.0], 2, vec![0.0, 1.0], None)
            .unwrap();
        assert_eq!(m.predict_one(&[2.0, 3.0]).unwrap(), 1.0);
        assert!(m.predict(&[1.0, 2.0, 3.0]).is_err());
        assert!(m.predict_one(&[1.0]).is_err());
    }

    #[test]
    fn clipping() {
        let m = FittedModel::new(kern(1.0), BasisKind::LandmarkKernel, vec![0.0], 1, vec![5.0], Some(1.5)).unwrap();
        assert_eq!(m.predict_one(&[0.0]).unwrap(), 1.5);
        let m = FittedModel::new(kern(1.0), BasisKind::LandmarkKernel, vec![0.0], 1, vec![-5.0], Some(1.5)).unwrap();
        assert_eq!(m.predict_one(&[0.0]).unwrap(), -1.5);
    }

    #[test]
    fn model_shape_is_validated() {
        assert!(FittedModel::new(kern(1.0), BasisKind::DenseRepresenter, vec![0.0, 1.0], 1, vec![1.0, 2.0], None).is_err());
        assert!(FittedModel::new(kern(1.0), BasisKind::DenseRepresenter, vec![0.0, 1.0], 1, vec![1.0; 4], None).is_ok());
        assert!(FittedModel::new(kern(1.0), BasisKind::LandmarkKernel, vec![0.0], 1, vec![f64::NAN], None).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = FittedModel::new(
            kern(0.3),
            BasisKind::DenseRepresenter,
            vec![0.1, 1.0 / 3.0],
            1,
            vec![1e-300, -2.0 / 7.0, std::f64::consts::E, 5e300],
            Some(1.0),
        )
        .unwrap();
        let back = FittedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(m.to_json().unwrap().contains("\"dense_representer\""));
    }

    #[test]
    fn exact_fit_interpolates_single_point() {
        let ds = SemiDataset::new(vec![0.4, -0.2], 2, vec![1.7]).unwrap();
        let m = fit_exact(&ds, &kern(1.0), 1e-9, 1e-9).unwrap();
        assert!((m.predict_one(&[0.4, -0.2]).unwrap() - 1.7).abs() < 1e-6);
        assert_eq!(m.basis_kind(), BasisKind::DenseRepresenter);
    }

    #[test]
    fn exact_fit_respects_cap() {
        let ds = SemiDataset::new(vec![0.0; 2200], 10, vec![1.0]).unwrap();
        let err = fit_exact(&ds, &kern(1.0), 1.0, 0.1).unwrap_err();
        assert!(matches!(err, Error::ResourceLimit(_)));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_sign(&[0.3, -0.2]), vec![1.0, -1.0]);
        assert_eq!(decode_sign(&[0.0]), vec![1.0]);
        assert_eq!(decode_sign(&[-0.0]), vec![1.0]);
    }

    #[test]
    fn schedule_examples() {
        let sp = ScheduleParams { lambda0: 1.0, mu0: 1.0, p0: 1.0, a: 1.0 };
        let s = schedule(16, &sp).unwrap();
        assert_eq!((s.lambda, s.mu, s.p), (0.5, 0.5, 12));
        assert!(schedule(1, &sp).is_err());
        let s = schedule(4, &sp).unwrap();
        assert_eq!(s.p, 3);
        // s = 1/(4a) = 1 dominates when a = 1/4; p capped at n.
        let s = schedule(16, &ScheduleParams { a: 0.25, ..sp }).unwrap();
        assert_eq!(s.p, 16);
        assert!(schedule(16, &ScheduleParams { a: 0.0, ..sp }).is_err());
    }
}
