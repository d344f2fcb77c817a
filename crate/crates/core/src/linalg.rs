//! Dense helpers shared by the pencil and operator modules.

use crate::error::{Error, Result};
use faer::{Mat, MatRef, Side};

/// Largest order handled by the cyclic Jacobi solver; bigger problems go to
/// faer's blocked tridiagonal solver.
pub const JACOBI_MAX_DIM: usize = 256;

const JACOBI_MAX_SWEEPS: usize = 60;

/// Eigen-decomposition of a real symmetric matrix, unsorted.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Column `i` pairs with `values[i]`.
    pub vectors: Mat<f64>,
}

/// Symmetric eigensolver used by the pencil reduction.
pub fn symmetric_eigen(m: MatRef<'_, f64>) -> Result<SymmetricEigen> {
    if m.nrows() <= JACOBI_MAX_DIM {
        jacobi_eigen(m)
    } else {
        let evd = m.self_adjoint_eigen(Side::Lower).map_err(|e| {
            Error::NumericalConsistency(format!("symmetric eigensolver failed: {e:?}"))
        })?;
        let s = evd.S().column_vector();
        Ok(SymmetricEigen {
            values: (0..m.nrows()).map(|i| s[i]).collect(),
            vectors: evd.U().to_owned(),
        })
    }
}

/// Cyclic Jacobi with a threshold schedule: during the first three sweeps
/// only entries above `0.2·S/n²` are rotated (`S` the off-diagonal mass);
/// after that, entries negligible against both diagonal terms are zeroed.
/// Reads the upper triangle only.
pub fn jacobi_eigen(m: MatRef<'_, f64>) -> Result<SymmetricEigen> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::invalid("jacobi_eigen needs a square matrix"));
    }
    // a: row-major upper triangle; vt: eigenvectors stored as rows.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            a[i * n + j] = m[(i, j)];
        }
    }
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q].abs();
            }
        }
        if off == 0.0 {
            return Ok(SymmetricEigen {
                values: d,
                vectors: Mat::from_fn(n, n, |i, j| vt[j * n + i]),
            });
        }
        let thresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a[p * n + q] = 0.0;
                    continue;
                }
                if apq.abs() <= thresh {
                    continue;
                }
                let h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let h = t * apq;
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a[p * n + q] = 0.0;

                let rot = |x: f64, y: f64| (x - s * (y + x * tau), y + s * (x - y * tau));
                for j in 0..p {
                    let (x, y) = rot(a[j * n + p], a[j * n + q]);
                    a[j * n + p] = x;
                    a[j * n + q] = y;
                }
                for j in p + 1..q {
                    let (x, y) = rot(a[p * n + j], a[j * n + q]);
                    a[p * n + j] = x;
                    a[j * n + q] = y;
                }
                for j in q + 1..n {
                    let (x, y) = rot(a[p * n + j], a[q * n + j]);
                    a[p * n + j] = x;
                    a[q * n + j] = y;
                }
                let (vp, vq) = split_rows(&mut vt, n, p, q);
                for (x, y) in vp.iter_mut().zip(vq.iter_mut()) {
                    let (nx, ny) = rot(*x, *y);
                    *x = nx;
                    *y = ny;
                }
            }
        }
        for ((bp, dp), zp) in b.iter_mut().zip(d.iter_mut()).zip(z.iter_mut()) {
            *bp += *zp;
            *dp = *bp;
            *zp = 0.0;
        }
    }
    Err(Error::NumericalConsistency(format!(
        "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
    )))
}

fn split_rows(v: &mut [f64], n: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = v.split_at_mut(q * n);
    (&mut head[p * n..p * n + n], &mut tail[..n])
}

pub fn frobenius(m: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)] * m[(i, j)];
        }
    }
    s.sqrt()
}

/// `‖M - Mᵀ‖_F`.
pub fn asymmetry(m: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..j {
            let diff = m[(i, j)] - m[(j, i)];
            s += 2.0 * diff * diff;
        }
    }
    s.sqrt()
}

/// Power-iteration estimate of the spectral norm of a symmetric matrix.
/// Deterministic start vector; 50 iterations or relative change below 1e-10.
pub fn spectral_norm_estimate(m: MatRef<'_, f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = faer::Col::<f64>::from_fn(n, |i| 1.0 + 0.1 * ((i as f64) * 0.618).sin());
    let nv = v.norm_l2();
    v /= nv;
    let mut est = 0.0;
    for _ in 0..50 {
        let w = m * &v;
        let nw = w.norm_l2();
        if nw == 0.0 {
            return 0.0;
        }
        let done = (nw - est).abs() <= 1e-10 * nw;
        est = nw;
        v = w / nw;
        if done {
            break;
        }
    }
    est.max(frobenius(m) / (n as f64).sqrt())
}

pub(crate) fn check_finite(m: MatRef<'_, f64>, what: &str) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::invalid(format!("non-finite entry in {what} at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let e = jacobi_eigen(m.as_ref()).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn jacobi_two_by_two() {
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = jacobi_eigen(m.as_ref()).unwrap();
        let mut vals = e.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let n = 40;
        let g = Mat::from_fn(n, n, |i, j| ((i * 7 + j * 13) as f64 * 0.37).sin());
        let m = g.transpose() * &g;
        let e = jacobi_eigen(m.as_ref()).unwrap();
        let lam = Mat::from_fn(n, n, |i, j| if i == j { e.values[i] } else { 0.0 });
        let rec = &e.vectors * &lam * e.vectors.transpose();
        assert!(frobenius((&rec - &m).as_ref()) < 1e-11 * frobenius(m.as_ref()));
        let gram = e.vectors.transpose() * &e.vectors;
        let eye = Mat::<f64>::identity(n, n);
        assert!(frobenius((&gram - &eye).as_ref()) < 1e-12);
    }

    #[test]
    fn jacobi_and_blocked_solver_agree() {
        let n = 30;
        let g = Mat::from_fn(n, n, |i, j| ((i * 3 + j * 5) as f64 * 0.11).cos());
        let m = &g + g.transpose();
        let mut a = jacobi_eigen(m.as_ref()).unwrap().values;
        let evd = m.self_adjoint_eigen(Side::Lower).unwrap();
        let mut b: Vec<f64> = (0..n).map(|i| evd.S().column_vector()[i]).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = Mat::from_fn(4, 4, |i, j| if i == j { [1.0, 5.0, 2.0, 0.5][i] } else { 0.0 });
        assert!((spectral_norm_estimate(m.as_ref()) - 5.0).abs() < 1e-6);
    }
}
