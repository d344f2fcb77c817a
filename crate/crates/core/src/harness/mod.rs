//! Benchmark sweeps over synthetic data.
//!
//! A sweep visits every `(n, trial)` pair of an [`ExperimentConfig`],
//! generates one dataset per pair from a seed derived with [`trial_seed`],
//! fits every configured method on that same dataset and records the error
//! on the unlabeled points (or on held-out points in inductive mode).

mod config;
mod eigvecs;
mod plot;
mod records;

pub use config::{Bandwidth, ExperimentConfig, Family, Method, Metric, MuSpec, PSpec};
pub use eigvecs::{export_eigenvectors, EigenExport};
pub use plot::plot_svg;
pub use records::{read_records, summarize, write_records, BenchRecord, Summary};

use crate::baselines::{harmonic_propagate, krr_fit, GraphConfig};
use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::estimator::{decode_sign, fit_exact_with, fit_with, ExactOptions, FitOptions};
use crate::filters::FilterSpec;
use crate::kernel::GaussianKernel;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// splitmix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `master ^ splitmix64(splitmix64(n) ^ trial)`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    master ^ splitmix64(splitmix64(n as u64) ^ trial as u64)
}

/// Error curve over `cfg.n_grid`, trials spread over `cfg.workers` threads.
pub fn run_error_curve(cfg: &ExperimentConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    run_sweep(cfg, cfg.effective_workers())
}

/// Same sweep, run on one thread so that fit times are not contended.
pub fn run_timing(cfg: &ExperimentConfig) -> Result<Vec<BenchRecord>> {
    cfg.validate()?;
    run_sweep(cfg, 1)
}

fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<BenchRecord>> {
    let jobs: Vec<(usize, usize)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, trial)) = jobs.get(idx) else {
                    break;
                };
                let recs = run_trial(cfg, n, trial);
                out.lock().expect("record sink poisoned").extend(recs);
            });
        }
    });
    let mut records = out.into_inner().expect("record sink poisoned");
    records.sort_by_key(|r| (r.method, r.n, r.trial));
    Ok(records)
}

/// Runs every configured method on the dataset for `(n, trial)`.
pub fn run_trial(cfg: &ExperimentConfig, n: usize, trial: usize) -> Vec<BenchRecord> {
    let seed = trial_seed(cfg.seed, n, trial);
    let n_labeled = cfg.n_labeled_for(n);
    let data = cfg.generate(n, seed);
    cfg.methods
        .iter()
        .map(|&method| {
            let mut rec = BenchRecord {
                method,
                n,
                n_labeled,
                trial,
                error: None,
                fit_seconds: 0.0,
                predict_seconds: 0.0,
                seed,
            };
            let outcome = data
                .as_ref()
                .map_err(|e| Error::invalid(e.to_string()))
                .and_then(|ds| evaluate(cfg, method, ds, n, seed));
            match outcome {
                Ok((err, fit_s, pred_s)) => {
                    rec.error = Some(err);
                    rec.fit_seconds = fit_s;
                    rec.predict_seconds = pred_s;
                }
                Err(e) => eprintln!("{method} n={n} trial={trial}: {e}"),
            }
            rec
        })
        .collect()
}

/// Fits `method` on the first `n` rows of `full` and scores it.
/// Returns `(error, fit_seconds, predict_seconds)`.
fn evaluate(
    cfg: &ExperimentConfig,
    method: Method,
    full: &SemiDataset,
    n: usize,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let inductive = cfg.test_points > 0;
    let train = if inductive { full.truncate(n)? } else { full.clone() };
    let truth = full
        .truth()
        .ok_or_else(|| Error::invalid("benchmark data must carry ground truth"))?;
    let (queries, targets) = if inductive {
        (&full.inputs()[n * full.d()..], &truth[n..])
    } else {
        (train.unlabeled_inputs(), &truth[train.n_labeled()..n])
    };
    if targets.is_empty() {
        return Err(Error::invalid("no evaluation points (all points are labeled)"));
    }

    let start = Instant::now();
    let (scores, fit_seconds, predict_seconds) = match method {
        Method::Graph => {
            if inductive {
                return Err(Error::invalid("graph propagation has no out-of-sample extension"));
            }
            let g = match cfg.graph_sigma {
                Bandwidth::Auto => GraphConfig::auto(n, train.d())?,
                Bandwidth::Fixed(s) => GraphConfig::new(s)?,
            };
            let res = harmonic_propagate(&train, &g)?;
            (res.values, start.elapsed().as_secs_f64(), 0.0)
        }
        _ => {
            let kernel = GaussianKernel::new(cfg.kernel_sigma(n, train.d())?)?;
            let model = match method {
                Method::KernelLaplacian => fit_with(
                    &train,
                    &kernel,
                    cfg.p.resolve(n),
                    cfg.mu.resolve(n),
                    &FilterSpec::new(cfg.filter, cfg.lambda)?,
                    seed ^ 0x1A4D_3A5C,
                    FitOptions {
                        averaging: cfg.averaging,
                        ..Default::default()
                    },
                )?,
                Method::Exact => fit_exact_with(
                    &train,
                    &kernel,
                    cfg.lambda,
                    cfg.mu.resolve(n),
                    ExactOptions {
                        cap: cfg.dense_cap,
                        averaging: cfg.exact_averaging,
                        clip: false,
                    },
                )?,
                Method::Krr => {
                    let krr_kernel = match cfg.krr_sigma {
                        Some(_) => GaussianKernel::new(cfg.krr_kernel_sigma(n, train.d())?)?,
                        None => kernel,
                    };
                    krr_fit(&train, &krr_kernel, cfg.krr_ridge)?
                }
                Method::Graph => unreachable!(),
            };
            let fit_seconds = start.elapsed().as_secs_f64();
            let t = Instant::now();
            let scores = model.predict(queries)?;
            (scores, fit_seconds, t.elapsed().as_secs_f64())
        }
    };
    Ok((score(cfg.metric, &scores, targets), fit_seconds, predict_seconds))
}

/// Classification error after sign decoding, or RMSE.
pub fn score(metric: Metric, scores: &[f64], targets: &[f64]) -> f64 {
    match metric {
        Metric::Classification => {
            let wrong = decode_sign(scores)
                .iter()
                .zip(targets)
                .filter(|(p, t)| p != t)
                .count();
            wrong as f64 / targets.len() as f64
        }
        Metric::Rmse => {
            let sq: f64 = scores.iter().zip(targets).map(|(s, t)| (s - t) * (s - t)).sum();
            (sq / targets.len() as f64).sqrt()
        }
    }
}
