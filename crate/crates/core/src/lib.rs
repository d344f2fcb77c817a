//! Semi-supervised regression with a kernelized Laplacian penalty.
//!
//! The estimator minimizes a least-squares fit on the labeled points plus a
//! Dirichlet-energy penalty estimated from all points, in the span of kernel
//! functions at a few landmarks. Fitting reduces to a generalized symmetric
//! eigenproblem `(A, B)` whose spectrum is filtered (Tikhonov or cutoff).
//!
//! Module map:
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`kernel`] | Gaussian kernel and its derivatives |
//! | [`pencil`] | Generalized eigen-decomposition and direct pencil solves |
//! | [`operators`] | Landmark and dense operator assembly |
//! | [`filters`] | Spectral filters |
//! | [`estimator`] | Fit, predict, decode, hyperparameter schedule |
//! | [`baselines`] | Harmonic graph propagation and kernel ridge regression |
//! | [`synthdata`] | Seeded synthetic datasets |
//! | [`harness`] | Benchmark sweeps, eigenvector export, SVG plots |

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod filters;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod operators;
pub mod pencil;
pub mod synthdata;

pub use dataset::SemiDataset;
pub use error::{Error, Result};
pub use estimator::{decode_sign, fit, fit_exact, schedule, BasisKind, FittedModel};
pub use filters::{FilterKind, FilterSpec};
pub use kernel::{GaussianKernel, Kernel};
pub use pencil::{gevd, pencil_solve, PencilDecomposition};
