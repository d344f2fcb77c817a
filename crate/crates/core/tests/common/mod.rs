#![allow(dead_code)]

use faer::Mat;
use lapreg::linalg::{frobenius, spectral_norm_estimate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Write;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normals(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| normal(rng)).collect()
}

/// `A = GᵀG` with `G` of shape `r × p` (PSD, rank ≤ r) and `B = HᵀH + 0.1·I`.
pub fn random_pencil(rng: &mut ChaCha8Rng, p: usize) -> (Mat<f64>, Mat<f64>) {
    let r = rng.random_range(1..=p);
    let g = Mat::from_fn(r, p, |_, _| normal(rng));
    let h = Mat::from_fn(p, p, |_, _| normal(rng));
    let a = g.transpose() * &g;
    let mut b = h.transpose() * &h;
    for i in 0..p {
        b[(i, i)] += 0.1;
    }
    (symmetrized(&a), symmetrized(&b))
}

pub fn symmetrized(m: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub fn spectral(m: &Mat<f64>) -> f64 {
    spectral_norm_estimate(m.as_ref())
}

pub fn frob(m: &Mat<f64>) -> f64 {
    frobenius(m.as_ref())
}

pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Writes straight to stderr so the line shows up even when the test
/// harness captures output.
pub fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2} {verdict}  {name}: {detail}");
}
