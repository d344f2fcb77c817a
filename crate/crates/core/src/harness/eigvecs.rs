use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::kernel::GaussianKernel;
use crate::operators::{assemble, select_landmarks};
use crate::pencil::gevd;
use std::io::Write;

/// Leading generalized eigenvectors of `(A, B)` evaluated as functions
/// `x ↦ Σⱼ u_{ij} k(x, zⱼ)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenExport {
    pub d: usize,
    /// Row-major `q × d` grid.
    pub grid: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `columns[i][r]` is eigenvector `i + 1` at grid row `r`.
    pub columns: Vec<Vec<f64>>,
}

/// Each column is signed so that its first non-zero grid value is positive.
pub fn export_eigenvectors(
    ds: &SemiDataset,
    k: &GaussianKernel,
    p: usize,
    mu: f64,
    m: usize,
    grid: &[f64],
    seed: u64,
) -> Result<EigenExport> {
    let d = ds.d();
    if m > p {
        return Err(Error::invalid(format!("cannot export {m} eigenvectors from p = {p}")));
    }
    if grid.len() % d != 0 {
        return Err(Error::invalid(format!("grid buffer is not a multiple of d = {d}")));
    }
    let lm = select_landmarks(ds, p, seed)?;
    let bundle = assemble(ds, k, &lm, mu)?;
    let dec = gevd(bundle.a.as_ref(), bundle.b.as_ref())?;

    let q = grid.len() / d;
    let mut columns = vec![vec![0.0; q]; m];
    for r in 0..q {
        let x = &grid[r * d..(r + 1) * d];
        let kx: Vec<f64> = (0..p).map(|j| k.eval_unchecked(x, lm.point(j))).collect();
        for (i, col) in columns.iter_mut().enumerate() {
            let u = dec.eigenvectors.col(i);
            col[r] = kx.iter().enumerate().map(|(j, kv)| kv * u[j]).sum();
        }
    }
    for col in &mut columns {
        if col.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0) {
            col.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(EigenExport {
        d,
        grid: grid.to_vec(),
        eigenvalues: dec.eigenvalues[..m].to_vec(),
        columns,
    })
}

impl EigenExport {
    /// Header `x0..x{d-1},e1..em`, one row per grid point. With no
    /// eigenvectors requested only the header is written.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        let header: Vec<String> = (0..self.d)
            .map(|j| format!("x{j}"))
            .chain((1..=self.columns.len()).map(|i| format!("e{i}")))
            .collect();
        w.write_record(&header).map_err(io)?;
        if !self.columns.is_empty() {
            for (r, x) in self.grid.chunks(self.d).enumerate() {
                let row: Vec<String> = x
                    .iter()
                    .copied()
                    .chain(self.columns.iter().map(|c| c[r]))
                    .map(|v| v.to_string())
                    .collect();
                w.write_record(&row).map_err(io)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SemiDataset {
        SemiDataset::new((0..40).map(|i| (i as f64 * 0.77).sin()).collect(), 2, vec![1.0]).unwrap()
    }

    #[test]
    fn header_only_for_zero_vectors() {
        let ds = small();
        let ex = export_eigenvectors(&ds, &GaussianKernel::new(0.5).unwrap(), 5, 0.05, 0, ds.inputs(), 1).unwrap();
        let mut buf = Vec::new();
        ex.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x0,x1\n");
    }

    #[test]
    fn columns_follow_sign_convention() {
        let ds = small();
        let ex = export_eigenvectors(&ds, &GaussianKernel::new(0.5).unwrap(), 8, 0.05, 3, ds.inputs(), 1).unwrap();
        assert_eq!(ex.columns.len(), 3);
        for col in &ex.columns {
            assert!(*col.iter().find(|v| **v != 0.0).unwrap() > 0.0);
        }
        let mut buf = Vec::new();
        ex.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x0,x1,e1,e2,e3\n"));
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn too_many_vectors() {
        let ds = small();
        assert!(export_eigenvectors(&ds, &GaussianKernel::new(0.5).unwrap(), 3, 0.05, 4, ds.inputs(), 1).is_err());
    }
}
