use crate::baselines::graph_bandwidth;
use crate::dataset::SemiDataset;
use crate::error::{Error, Result};
use crate::filters::FilterKind;
use crate::operators::CovarianceAveraging;
use crate::synthdata::{gen_circles, gen_gaussian_mix, CirclesSpec, GaussianMixSpec};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Circles,
    Gauss2,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circles" => Ok(Family::Circles),
            "gauss2" => Ok(Family::Gauss2),
            other => Err(Error::invalid(format!("unknown data family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    KernelLaplacian,
    Graph,
    Krr,
    Exact,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::KernelLaplacian, Method::Graph, Method::Krr, Method::Exact];

    pub fn name(&self) -> &'static str {
        match self {
            Method::KernelLaplacian => "kernel_laplacian",
            Method::Graph => "graph",
            Method::Krr => "krr",
            Method::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Classification,
    Rmse,
}

/// A bandwidth given as a number or `"auto"` (`n^{-1/(d+4)} ln n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NumOrText", into = "NumOrText")]
pub enum Bandwidth {
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(&self, n: usize, d: usize) -> Result<f64> {
        match *self {
            Bandwidth::Auto => graph_bandwidth(n, d),
            Bandwidth::Fixed(s) => Ok(s),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NumOrText::parse(s).try_into()
    }
}

/// `μ` as a number or `"1/n"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NumOrText", into = "NumOrText")]
pub enum MuSpec {
    InverseN,
    Fixed(f64),
}

impl MuSpec {
    pub fn resolve(&self, n: usize) -> f64 {
        match *self {
            MuSpec::InverseN => 1.0 / n as f64,
            MuSpec::Fixed(m) => m,
        }
    }
}

impl FromStr for MuSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NumOrText::parse(s).try_into()
    }
}

/// Landmark count: a number (capped at `n`), `"n"`, or `"sqrt_log"`
/// for `⌈√n ln n⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NumOrText", into = "NumOrText")]
pub enum PSpec {
    All,
    SqrtLog,
    Fixed(usize),
}

impl PSpec {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            PSpec::All => n,
            PSpec::SqrtLog => (((n as f64).sqrt() * (n as f64).ln()).ceil() as usize).clamp(1, n),
            PSpec::Fixed(p) => p.clamp(1, n),
        }
    }
}

impl FromStr for PSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NumOrText::parse(s).try_into()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    fn parse(s: &str) -> Self {
        s.parse().map(NumOrText::Num).unwrap_or_else(|_| NumOrText::Text(s.to_string()))
    }
}

impl TryFrom<NumOrText> for Bandwidth {
    type Error = Error;

    fn try_from(v: NumOrText) -> Result<Self> {
        match v {
            NumOrText::Num(s) if s > 0.0 && s.is_finite() => Ok(Bandwidth::Fixed(s)),
            NumOrText::Text(t) if t == "auto" => Ok(Bandwidth::Auto),
            other => Err(Error::invalid(format!("bandwidth must be positive or 'auto', got {other:?}"))),
        }
    }
}

impl From<Bandwidth> for NumOrText {
    fn from(b: Bandwidth) -> Self {
        match b {
            Bandwidth::Auto => NumOrText::Text("auto".into()),
            Bandwidth::Fixed(s) => NumOrText::Num(s),
        }
    }
}

impl TryFrom<NumOrText> for MuSpec {
    type Error = Error;

    fn try_from(v: NumOrText) -> Result<Self> {
        match v {
            NumOrText::Num(m) if m > 0.0 && m.is_finite() => Ok(MuSpec::Fixed(m)),
            NumOrText::Text(t) if t == "1/n" => Ok(MuSpec::InverseN),
            other => Err(Error::invalid(format!("mu must be positive or '1/n', got {other:?}"))),
        }
    }
}

impl From<MuSpec> for NumOrText {
    fn from(m: MuSpec) -> Self {
        match m {
            MuSpec::InverseN => NumOrText::Text("1/n".into()),
            MuSpec::Fixed(v) => NumOrText::Num(v),
        }
    }
}

impl TryFrom<NumOrText> for PSpec {
    type Error = Error;

    fn try_from(v: NumOrText) -> Result<Self> {
        match v {
            NumOrText::Num(p) if p >= 1.0 && p.fract() == 0.0 => Ok(PSpec::Fixed(p as usize)),
            NumOrText::Text(t) if t == "n" => Ok(PSpec::All),
            NumOrText::Text(t) if t == "sqrt_log" => Ok(PSpec::SqrtLog),
            other => Err(Error::invalid(format!(
                "p must be a positive integer, 'n' or 'sqrt_log', got {other:?}"
            ))),
        }
    }
}

impl From<PSpec> for NumOrText {
    fn from(p: PSpec) -> Self {
        match p {
            PSpec::All => NumOrText::Text("n".into()),
            PSpec::SqrtLog => NumOrText::Text("sqrt_log".into()),
            PSpec::Fixed(v) => NumOrText::Num(v as f64),
        }
    }
}

/// One benchmark sweep. Serializes to the JSON config file format; every
/// field has a default so partial files are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Dimension of the Gaussian mixture.
    pub d: usize,
    /// Distance between the mixture centers.
    pub delta: f64,
    pub num_circles: usize,
    pub inner_radius: f64,
    pub radius_step: f64,

    pub methods: Vec<Method>,
    /// Kernel bandwidth for the kernel methods.
    pub sigma: Bandwidth,
    pub lambda: f64,
    pub mu: MuSpec,
    pub p: PSpec,
    pub filter: FilterKind,
    pub averaging: CovarianceAveraging,
    /// Covariance averaging used by the exact dense fit.
    pub exact_averaging: CovarianceAveraging,
    pub dense_cap: usize,
    pub krr_ridge: f64,
    /// KRR bandwidth; falls back to `sigma`.
    pub krr_sigma: Option<Bandwidth>,
    pub graph_sigma: Bandwidth,

    pub seed: u64,
    pub trials: usize,
    /// `n_labeled = max(1, round(label_ratio · n))` unless `n_labeled` is set.
    pub label_ratio: f64,
    pub n_labeled: Option<usize>,
    pub n_grid: Vec<usize>,
    pub metric: Metric,
    /// Held-out points per trial; 0 evaluates transductively.
    pub test_points: usize,
    /// Worker threads; 0 uses the available parallelism.
    pub workers: usize,
    pub output: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::fig2()
    }
}

impl ExperimentConfig {
    /// Two ten-dimensional unit Gaussians three apart, one label in ten.
    pub fn fig2() -> Self {
        Self {
            family: Family::Gauss2,
            d: 10,
            delta: 3.0,
            num_circles: 4,
            inner_radius: 1.0,
            radius_step: 1.0,
            methods: vec![Method::KernelLaplacian, Method::Graph],
            sigma: Bandwidth::Auto,
            lambda: 1.0,
            mu: MuSpec::InverseN,
            p: PSpec::Fixed(50),
            filter: FilterKind::Tikhonov,
            averaging: CovarianceAveraging::Labeled,
            exact_averaging: CovarianceAveraging::Labeled,
            dense_cap: 2500,
            krr_ridge: 1e-3,
            krr_sigma: None,
            graph_sigma: Bandwidth::Auto,
            seed: 0,
            trials: 50,
            label_ratio: 0.1,
            n_labeled: None,
            n_grid: vec![20, 40, 70, 100, 200, 400, 700, 1000],
            metric: Metric::Classification,
            test_points: 0,
            workers: 0,
            output: None,
        }
    }

    /// Four concentric circles, 2000 points, one label per circle, `p = n`.
    pub fn fig1() -> Self {
        Self {
            family: Family::Circles,
            methods: vec![Method::KernelLaplacian, Method::Krr],
            sigma: Bandwidth::Fixed(0.2),
            krr_sigma: Some(Bandwidth::Fixed(0.2)),
            p: PSpec::All,
            averaging: CovarianceAveraging::AllPoints,
            n_labeled: Some(4),
            n_grid: vec![2000],
            trials: 10,
            ..Self::fig2()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig1" => Ok(Self::fig1()),
            "fig2" => Ok(Self::fig2()),
            other => Err(Error::invalid(format!("unknown preset '{other}' (expected fig1 or fig2)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("n_grid must be non-empty and strictly ascending"));
        }
        if self.n_grid[0] < 2 {
            return Err(Error::invalid("every n in n_grid must be at least 2"));
        }
        if !(self.label_ratio > 0.0 && self.label_ratio <= 1.0) {
            return Err(Error::invalid(format!(
                "label_ratio must lie in (0, 1], got {}",
                self.label_ratio
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods configured"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn n_labeled_for(&self, n: usize) -> usize {
        self.n_labeled
            .unwrap_or_else(|| (self.label_ratio * n as f64).round() as usize)
            .clamp(1, n)
    }

    pub fn kernel_sigma(&self, n: usize, d: usize) -> Result<f64> {
        self.sigma.resolve(n, d)
    }

    pub fn krr_kernel_sigma(&self, n: usize, d: usize) -> Result<f64> {
        self.krr_sigma.unwrap_or(self.sigma).resolve(n, d)
    }

    pub(crate) fn effective_workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// Dataset for `n` training points plus `test_points` held-out rows.
    pub fn generate(&self, n: usize, seed: u64) -> Result<SemiDataset> {
        let total = n + self.test_points;
        let n_labeled = self.n_labeled_for(n);
        match self.family {
            Family::Circles => gen_circles(&CirclesSpec {
                n: total,
                n_labeled,
                num_circles: self.num_circles,
                inner_radius: self.inner_radius,
                radius_step: self.radius_step,
                seed,
            }),
            Family::Gauss2 => gen_gaussian_mix(&GaussianMixSpec {
                n: total,
                n_labeled,
                d: self.d,
                delta: self.delta,
                seed,
            }),
        }
    }
}
