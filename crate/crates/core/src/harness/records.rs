use super::config::Method;
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{Read, Write};

pub const RECORD_HEADER: [&str; 8] = [
    "method",
    "n",
    "n_labeled",
    "trial",
    "error",
    "fit_seconds",
    "predict_seconds",
    "seed",
];

/// Written in the `error` column when a fit failed.
const FAILED: &str = "failed";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub n: usize,
    pub n_labeled: usize,
    pub trial: usize,
    /// `None` when the fit failed.
    pub error: Option<f64>,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
    pub seed: u64,
}

pub fn write_records<W: Write>(records: &[BenchRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(RECORD_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.method.name().to_string(),
            r.n.to_string(),
            r.n_labeled.to_string(),
            r.trial.to_string(),
            r.error.map_or_else(|| FAILED.to_string(), |e| e.to_string()),
            r.fit_seconds.to_string(),
            r.predict_seconds.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<BenchRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if line == 1 {
            if rec.iter().ne(RECORD_HEADER) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header {}", RECORD_HEADER.join(",")),
                });
            }
            continue;
        }
        if rec.len() != RECORD_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", RECORD_HEADER.len(), rec.len()),
            });
        }
        let bad = |field: &str| Error::Parse {
            line,
            message: format!("invalid {field}"),
        };
        let method = rec[0].parse::<Method>().map_err(|_| bad("method"))?;
        let error = match &rec[4] {
            FAILED => None,
            s => Some(s.parse::<f64>().map_err(|_| bad("error"))?),
        };
        out.push(BenchRecord {
            method,
            n: rec[1].parse().map_err(|_| bad("n"))?,
            n_labeled: rec[2].parse().map_err(|_| bad("n_labeled"))?,
            trial: rec[3].parse().map_err(|_| bad("trial"))?,
            error,
            fit_seconds: rec[5].parse().map_err(|_| bad("fit_seconds"))?,
            predict_seconds: rec[6].parse().map_err(|_| bad("predict_seconds"))?,
            seed: rec[7].parse().map_err(|_| bad("seed"))?,
        });
    }
    Ok(out)
}

/// Per `(method, n)` statistics over successful trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: Method,
    pub n: usize,
    pub count: usize,
    pub failures: usize,
    pub mean_error: f64,
    /// Population standard deviation.
    pub std_error: f64,
    pub mean_fit_seconds: f64,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(Method, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.method, r.n)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, n), rs)| {
            let ok: Vec<&BenchRecord> = rs.iter().copied().filter(|r| r.error.is_some()).collect();
            let count = ok.len();
            let mean = |f: &dyn Fn(&BenchRecord) -> f64| {
                if count == 0 {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / count as f64
                }
            };
            let mean_error = mean(&|r| r.error.unwrap_or(0.0));
            let var = mean(&|r| (r.error.unwrap_or(0.0) - mean_error).powi(2));
            Summary {
                method,
                n,
                count,
                failures: rs.len() - count,
                mean_error,
                std_error: var.sqrt(),
                mean_fit_seconds: mean(&|r| r.fit_seconds),
            }
        })
        .collect()
}
