//! Semi-supervised datasets and their CSV form.
//!
//! The CSV layout is `x0,...,x{d-1},y` with an empty `y` for unlabeled rows.
//! Loading stably partitions labeled rows to the front so that the labeled
//! points always occupy rows `0..n_labeled`.

use crate::error::{Error, Result};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq)]
pub struct SemiDataset {
    inputs: Vec<f64>,
    n: usize,
    d: usize,
    labels: Vec<f64>,
    /// Ground-truth targets for every row, when the generator knows them.
    truth: Option<Vec<f64>>,
}

impl SemiDataset {
    /// `inputs` is row-major `n × d`; `labels` belong to the first rows.
    pub fn new(inputs: Vec<f64>, d: usize, labels: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if inputs.is_empty() || inputs.len() % d != 0 {
            return Err(Error::invalid(format!(
                "input buffer of length {} is not a non-empty multiple of d = {d}",
                inputs.len()
            )));
        }
        let n = inputs.len() / d;
        if labels.is_empty() || labels.len() > n {
            return Err(Error::invalid(format!(
                "need 1 <= n_labeled <= n, got n_labeled = {} with n = {n}",
                labels.len()
            )));
        }
        if let Some(i) = inputs.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite input at row {}", i / d)));
        }
        if let Some(i) = labels.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite label at row {i}")));
        }
        Ok(Self {
            inputs,
            n,
            d,
            labels,
            truth: None,
        })
    }

    /// Attaches ground-truth targets for all `n` rows.
    pub fn with_truth(mut self, truth: Vec<f64>) -> Result<Self> {
        if truth.len() != self.n {
            return Err(Error::invalid(format!(
                "truth has length {}, expected {}",
                truth.len(),
                self.n
            )));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.d..(i + 1) * self.d]
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn truth(&self) -> Option<&[f64]> {
        self.truth.as_deref()
    }

    /// Row-major inputs of the labeled prefix.
    pub fn labeled_inputs(&self) -> &[f64] {
        &self.inputs[..self.n_labeled() * self.d]
    }

    /// Row-major inputs of the unlabeled rows.
    pub fn unlabeled_inputs(&self) -> &[f64] {
        &self.inputs[self.n_labeled() * self.d..]
    }

    /// Same points and truth with the labels multiplied by `alpha`.
    pub fn scale_labels(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        for y in &mut out.labels {
            *y *= alpha;
        }
        out
    }

    /// Keeps the first `n` rows; labels beyond `n` are dropped.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(Error::invalid(format!("cannot truncate {} rows to {n}", self.n)));
        }
        let labels = self.labels[..self.n_labeled().min(n)].to_vec();
        let ds = Self::new(self.inputs[..n * self.d].to_vec(), self.d, labels)?;
        match &self.truth {
            Some(t) => ds.with_truth(t[..n].to_vec()),
            None => Ok(ds),
        }
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| csv_error(e, 1))?
            .iter()
            .map(str::trim)
            .map(String::from)
            .collect::<Vec<_>>();
        let d = header.len().saturating_sub(1);
        let expected: Vec<String> = (0..d).map(|j| format!("x{j}")).chain(["y".into()]).collect();
        if d == 0 || header != expected {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {}", expected.join(",")),
            });
        }
        let mut labeled: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut unlabeled: Vec<Vec<f64>> = Vec::new();
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 2;
            let rec = rec.map_err(|e| csv_error(e, line))?;
            if rec.len() != d + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", d + 1, rec.len()),
                });
            }
            let x = (0..d)
                .map(|j| parse_field(&rec[j], line))
                .collect::<Result<Vec<_>>>()?;
            let y = rec[d].trim();
            if y.is_empty() {
                unlabeled.push(x);
            } else {
                labeled.push((x, parse_field(y, line)?));
            }
        }
        let labels: Vec<f64> = labeled.iter().map(|(_, y)| *y).collect();
        let inputs: Vec<f64> = labeled
            .into_iter()
            .map(|(x, _)| x)
            .chain(unlabeled)
            .flatten()
            .collect();
        Self::new(inputs, d, labels)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.d).map(|j| format!("x{j}")).collect();
        header.push("y".into());
        w.write_record(&header).map_err(|e| csv_error(e, 0))?;
        for i in 0..self.n {
            let mut rec: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            rec.push(self.labels.get(i).map(|y| y.to_string()).unwrap_or_default());
            w.write_record(&rec).map_err(|e| csv_error(e, 0))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads query points from a CSV with header `x0..x{d-1}` and an optional
/// trailing `y` column, which is ignored. Returns the row-major buffer and
/// `d`.
pub fn read_points<R: Read>(reader: R) -> Result<(Vec<f64>, usize)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let d = if header.last().is_some_and(|h| h == "y") { header.len() - 1 } else { header.len() };
    if d == 0 || (0..d).any(|j| header[j] != format!("x{j}")) {
        return Err(Error::Parse {
            line: 1,
            message: "expected header x0,x1,... with an optional y column".into(),
        });
    }
    let mut points = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| csv_error(e, line))?;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        for j in 0..d {
            points.push(parse_field(&rec[j], line)?);
        }
    }
    Ok((points, d))
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: '{s}'"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value '{s}'"),
        });
    }
    Ok(v)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback_line);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shapes() {
        assert!(SemiDataset::new(vec![0.0; 6], 2, vec![1.0]).is_ok());
        assert!(SemiDataset::new(vec![0.0; 5], 2, vec![1.0]).is_err());
        assert!(SemiDataset::new(vec![0.0; 6], 2, vec![]).is_err());
        assert!(SemiDataset::new(vec![0.0; 2], 2, vec![1.0, 2.0]).is_err());
        assert!(SemiDataset::new(vec![f64::NAN, 0.0], 2, vec![1.0]).is_err());
    }

    #[test]
    fn csv_partitions_labeled_rows_first() {
        let text = "x0,x1,y\n1,2,\n3,4,-1\n5,6,\n7,8,1\n";
        let ds = SemiDataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.n(), 4);
        assert_eq!(ds.labels(), &[-1.0, 1.0]);
        assert_eq!(ds.row(0), &[3.0, 4.0]);
        assert_eq!(ds.row(1), &[7.0, 8.0]);
        assert_eq!(ds.row(2), &[1.0, 2.0]);
        assert_eq!(ds.row(3), &[5.0, 6.0]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = SemiDataset::new(
            vec![0.1, 1.0 / 3.0, -2.5e-300, std::f64::consts::PI],
            2,
            vec![0.7],
        )
        .unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = SemiDataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let err = SemiDataset::read_csv("x0,y\n1,\nabc,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = SemiDataset::read_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn points_with_and_without_labels() {
        let (pts, d) = read_points("x0,x1,y\n1,2,\n3,4,-1\n".as_bytes()).unwrap();
        assert_eq!((pts, d), (vec![1.0, 2.0, 3.0, 4.0], 2));
        let (pts, d) = read_points("x0\n0.5\n".as_bytes()).unwrap();
        assert_eq!((pts, d), (vec![0.5], 1));
        assert!(matches!(read_points("x1\n1\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_points("x0\n1\nz\n".as_bytes()), Err(Error::Parse { line: 3, .. })));
    }
}
