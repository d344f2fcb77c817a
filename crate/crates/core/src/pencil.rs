//! Symmetric-definite generalized eigenvalue problems `A v = λ B v`.
//!
//! `B` is Cholesky-factored as `L Lᵀ`, the pencil is reduced to the standard
//! symmetric problem `C = L⁻¹ A L⁻ᵀ`, and eigenvectors are mapped back with
//! `L⁻ᵀ`, which makes them B-orthonormal.

use crate::error::{Error, Result};
use crate::linalg::{self, asymmetry, frobenius, spectral_norm_estimate};
use faer::linalg::solvers::{LltError, Solve};
use faer::{Col, Mat, MatRef, Side};

/// Relative Frobenius asymmetry accepted on input matrices.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Relative size of the single diagonal shift tried when `B` is not
/// numerically definite.
pub const JITTER: f64 = 1e-10;
/// Negative eigenvalues down to `-NEGATIVE_TOL · max(‖A‖, λmax)` (or the
/// reduction's rounding bound, if larger) are clamped to 0.
pub const NEGATIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct PencilDecomposition {
    /// Sorted non-increasing, clamped to be non-negative.
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`; `VᵀBV = I`.
    pub eigenvectors: Mat<f64>,
    /// Whether `B` needed the diagonal jitter to factor.
    pub jittered: bool,
}

impl PencilDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

/// Generalized eigen-decomposition of the pencil `(A, B)` with `A` symmetric
/// PSD and `B` symmetric positive definite.
pub fn gevd(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<PencilDecomposition> {
    let p = check_pencil(a, b)?;
    let (llt, jittered) = factor_with_jitter(b)?;
    let l = llt.L();

    // C = L⁻¹ A L⁻ᵀ via two triangular solves, A symmetric.
    let mut x = a.to_owned();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    let c = Mat::from_fn(p, p, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));

    let eig = linalg::symmetric_eigen(c.as_ref())?;
    let mut v = eig.vectors;
    l.transpose().solve_upper_triangular_in_place(v.as_mut());

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.values[j].total_cmp(&eig.values[i]));

    // Relative slack on the spectrum, plus the rounding error the reduction
    // itself can introduce: forming C costs about p·ε·‖A‖·‖B⁻¹‖.
    let norm_a = spectral_norm_estimate(a);
    let lambda_max = eig.values[order[0]].max(0.0);
    let reduction_error = f64::EPSILON * p as f64 * norm_a * inverse_norm_estimate(l);
    let tol = (NEGATIVE_TOL * norm_a.max(lambda_max)).max(reduction_error);
    let mut eigenvalues = Vec::with_capacity(p);
    for &i in &order {
        let ev = eig.values[i];
        if !ev.is_finite() || ev < -tol {
            return Err(Error::NumericalConsistency(format!(
                "generalized eigenvalue {ev:e} is below the tolerance -{tol:e}"
            )));
        }
        eigenvalues.push(ev.max(0.0));
    }
    let eigenvectors = Mat::from_fn(p, p, |r, k| v[(r, order[k])]);
    Ok(PencilDecomposition {
        eigenvalues,
        eigenvectors,
        jittered,
    })
}

/// Estimates `‖B⁻¹‖ = ‖L⁻¹‖²` by power iteration through the factor,
/// never below the cheap bound `1 / min Lᵢᵢ²`.
fn inverse_norm_estimate(l: MatRef<'_, f64>) -> f64 {
    let p = l.nrows();
    let pivot_bound = (0..p).map(|i| 1.0 / (l[(i, i)] * l[(i, i)])).fold(0.0, f64::max);
    let mut x = Mat::<f64>::from_fn(p, 1, |i, _| 1.0 + (i % 7) as f64 * 0.1);
    let mut estimate = 0.0;
    for _ in 0..30 {
        let norm = frobenius(x.as_ref());
        if !(norm > 0.0 && norm.is_finite()) {
            break;
        }
        for i in 0..p {
            x[(i, 0)] /= norm;
        }
        l.solve_lower_triangular_in_place(x.as_mut());
        l.transpose().solve_upper_triangular_in_place(x.as_mut());
        let next = frobenius(x.as_ref());
        if (next - estimate).abs() <= 1e-3 * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    if estimate.is_finite() {
        estimate.max(pivot_bound)
    } else {
        pivot_bound
    }
}

/// Solves `(A + λB) x = rhs` directly by Cholesky. This is the closed form
/// of the Tikhonov filter and serves as its independent check. A failed
/// factorization gets the same single jitter retry as `B` in [`gevd`].
pub fn pencil_solve(
    a: MatRef<'_, f64>,
    b: MatRef<'_, f64>,
    lambda: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let p = check_pencil(a, b)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
    }
    if rhs.len() != p {
        return Err(Error::invalid(format!(
            "right-hand side has length {}, expected {p}",
            rhs.len()
        )));
    }
    let m = Mat::from_fn(p, p, |i, j| a[(i, j)] + lambda * b[(i, j)]);
    let (llt, _) = factor_with_jitter(m.as_ref())?;
    Ok(solve_with(&llt, rhs))
}

/// Like [`pencil_solve`] on a single SPD matrix, retrying once with the
/// standard jitter when the factorization fails.
pub(crate) fn solve_spd_jittered(m: MatRef<'_, f64>, rhs: &[f64]) -> Result<(Vec<f64>, bool)> {
    let (llt, jittered) = factor_with_jitter(m)?;
    Ok((solve_with(&llt, rhs), jittered))
}

fn solve_with(llt: &faer::linalg::solvers::Llt<f64>, rhs: &[f64]) -> Vec<f64> {
    let r = Col::from_fn(rhs.len(), |i| rhs[i]);
    let x = llt.solve(&r);
    (0..rhs.len()).map(|i| x[i]).collect()
}

fn factor_with_jitter(b: MatRef<'_, f64>) -> Result<(faer::linalg::solvers::Llt<f64>, bool)> {
    match b.llt(Side::Lower) {
        Ok(llt) => Ok((llt, false)),
        Err(_) => {
            let p = b.nrows();
            let trace: f64 = (0..p).map(|i| b[(i, i)]).sum();
            let shift = JITTER * (trace / p as f64).abs().max(f64::MIN_POSITIVE);
            let shifted = Mat::from_fn(p, p, |i, j| b[(i, j)] + if i == j { shift } else { 0.0 });
            shifted
                .llt(Side::Lower)
                .map(|llt| (llt, true))
                .map_err(pivot_error)
        }
    }
}

fn pivot_error(e: LltError) -> Error {
    match e {
        LltError::NonPositivePivot { index } => Error::SingularPencil { pivot: index },
    }
}

fn check_pencil(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<usize> {
    let p = a.nrows();
    if p == 0 || a.ncols() != p || b.nrows() != p || b.ncols() != p {
        return Err(Error::invalid(format!(
            "pencil matrices must be square and of equal order, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    linalg::check_finite(a, "A")?;
    linalg::check_finite(b, "B")?;
    for (m, name) in [(a, "A"), (b, "B")] {
        let asym = asymmetry(m);
        if asym > SYMMETRY_TOL * frobenius(m) {
            return Err(Error::invalid(format!(
                "{name} is not symmetric (asymmetry {asym:e})"
            )));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> Mat<f64> {
        Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn identity_pencil() {
        let dec = gevd(diag(&[1.0, 1.0]).as_ref(), diag(&[1.0, 1.0]).as_ref()).unwrap();
        assert_eq!(dec.eigenvalues, vec![1.0, 1.0]);
        let g = dec.eigenvectors.transpose() * &dec.eigenvectors;
        assert!(frobenius((&g - Mat::<f64>::identity(2, 2)).as_ref()) < 1e-14);
    }

    #[test]
    fn diagonal_pencil() {
        let dec = gevd(diag(&[2.0, 1.0]).as_ref(), diag(&[1.0, 1.0]).as_ref()).unwrap();
        assert_eq!(dec.eigenvalues, vec![2.0, 1.0]);
        assert_eq!(dec.eigenvectors[(0, 0)].abs(), 1.0);
        assert_eq!(dec.eigenvectors[(1, 1)].abs(), 1.0);
    }

    #[test]
    fn scaled_second_vector() {
        let dec = gevd(diag(&[1.0, 0.0]).as_ref(), diag(&[1.0, 2.0]).as_ref()).unwrap();
        assert_eq!(dec.eigenvalues, vec![1.0, 0.0]);
        assert!((dec.eigenvectors[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((dec.eigenvectors[(1, 1)].abs() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(dec.eigenvectors[(1, 0)], 0.0);
    }

    #[test]
    fn solve_examples() {
        let x = pencil_solve(diag(&[1.0, 1.0]).as_ref(), diag(&[1.0, 1.0]).as_ref(), 1.0, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let x = pencil_solve(diag(&[3.0, 0.0]).as_ref(), diag(&[1.0, 1.0]).as_ref(), 1.0, &[4.0, 2.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_system_reports_pivot() {
        let err = pencil_solve(diag(&[1.0, -5.0]).as_ref(), diag(&[1.0, 1.0]).as_ref(), 1.0, &[1.0, 1.0])
            .unwrap_err();
        assert!(matches!(err, Error::SingularPencil { pivot: 1 }));
    }

    #[test]
    fn singular_b_names_pivot() {
        let err = gevd(diag(&[1.0, 1.0, 1.0]).as_ref(), diag(&[1.0, 1.0, -1.0]).as_ref()).unwrap_err();
        assert!(matches!(err, Error::SingularPencil { pivot: 2 }));
    }

    #[test]
    fn duplicate_rows_trigger_jitter() {
        // Rank-one B: the plain factorization fails, the jittered one succeeds.
        let b = Mat::from_fn(2, 2, |_, _| 1.0);
        let dec = gevd(diag(&[1.0, 1.0]).as_ref(), b.as_ref()).unwrap();
        assert!(dec.jittered);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let mut a = diag(&[1.0, 1.0]);
        a[(0, 1)] = 0.5;
        let err = gevd(a.as_ref(), diag(&[1.0, 1.0]).as_ref()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        let err = gevd(diag(&[1.0]).as_ref(), diag(&[1.0, 1.0]).as_ref()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
