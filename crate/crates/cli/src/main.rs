use clap::{Args, Parser, Subcommand, ValueEnum};
use lapreg::baselines::{harmonic_propagate, krr_fit, GraphConfig};
use lapreg::dataset::read_points;
use lapreg::estimator::{fit_exact_with, fit_with, ExactOptions, FitOptions};
use lapreg::harness::{
    export_eigenvectors, plot_svg, read_records, run_error_curve, run_timing, summarize, write_records,
    Bandwidth, BenchRecord, ExperimentConfig, Family, Method, Metric, MuSpec, PSpec,
};
use lapreg::operators::{CovarianceAveraging, DEFAULT_DENSE_CAP};
use lapreg::synthdata::{gen_circles, gen_gaussian_mix, CirclesSpec, GaussianMixSpec};
use lapreg::{decode_sign, Error, FilterKind, FilterSpec, FittedModel, GaussianKernel, Result, SemiDataset};
use serde::de::DeserializeOwned;
use serde_json::Value;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "lapreg", version, about = "Laplacian-regularized kernel regression benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
    /// Fit a model on a dataset CSV and write it as JSON.
    Fit(FitArgs),
    /// Score query points with a saved model.
    Predict(PredictArgs),
    /// Export the leading generalized eigenvectors evaluated on a grid.
    Eigvecs(EigvecsArgs),
    /// Error-vs-n sweep; writes benchmark records as CSV.
    BenchError(BenchArgs),
    /// Single-threaded fit-time sweep; writes benchmark records as CSV.
    BenchTime(BenchArgs),
    /// Render a records CSV as an SVG error plot.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value = "gauss2")]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Defaults to one label per circle, or a tenth of the points.
    #[arg(long)]
    n_labeled: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    d: usize,
    #[arg(long, default_value_t = 3.0)]
    delta: f64,
    #[arg(long, default_value_t = 4)]
    num_circles: usize,
    #[arg(long, default_value_t = 1.0)]
    inner_radius: f64,
    #[arg(long, default_value_t = 1.0)]
    radius_step: f64,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Baseline {
    Graph,
    Krr,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMethod {
    #[value(name = "kernel_laplacian")]
    KernelLaplacian,
    Exact,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV (`x0..,y`, empty `y` for unlabeled rows).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "kernel_laplacian")]
    method: FitMethod,
    /// Fit a baseline instead. `graph` has no model and writes its scores
    /// on the unlabeled rows as CSV.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Kernel bandwidth, a number or `auto`.
    #[arg(long, default_value = "1")]
    sigma: Bandwidth,
    /// Graph bandwidth, a number or `auto`.
    #[arg(long, default_value = "auto")]
    graph_sigma: Bandwidth,
    #[arg(long, default_value = "tikhonov")]
    filter: FilterKind,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// A number or `1/n`.
    #[arg(long, default_value = "1/n")]
    mu: MuSpec,
    /// Landmarks: a number, `n` or `sqrt_log`.
    #[arg(long, default_value = "sqrt_log")]
    p: PSpec,
    /// `all_points` or `labeled`.
    #[arg(long, value_parser = parse_serde::<CovarianceAveraging>, default_value = "all_points")]
    averaging: CovarianceAveraging,
    /// Clip predictions to the largest absolute label.
    #[arg(long)]
    clip: bool,
    /// Stream the derivative block instead of keeping it in memory.
    #[arg(long)]
    low_memory: bool,
    #[arg(long, default_value_t = 1e-3)]
    krr_ridge: f64,
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    /// Landmark sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Query CSV with header `x0..` and an optional, ignored `y` column.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EigvecsArgs {
    #[arg(long)]
    data: PathBuf,
    /// Evaluation points; defaults to the dataset's own points.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, default_value = "1")]
    sigma: Bandwidth,
    #[arg(long, default_value = "n")]
    p: PSpec,
    #[arg(long, default_value = "1/n")]
    mu: MuSpec,
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sweep settings. A preset (or the `fig2` defaults) is overlaid with the
/// JSON config file, then with any flags given here.
#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_parser = ["fig1", "fig2"])]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<Family>,
    /// Comma-separated: kernel_laplacian, graph, krr, exact.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Shorthand for `--methods kernel_laplacian,<baseline>`.
    #[arg(long, value_enum, conflicts_with = "methods")]
    baseline: Option<Baseline>,
    #[arg(long)]
    sigma: Option<Bandwidth>,
    #[arg(long)]
    krr_sigma: Option<Bandwidth>,
    #[arg(long)]
    graph_sigma: Option<Bandwidth>,
    #[arg(long)]
    filter: Option<FilterKind>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<MuSpec>,
    #[arg(long)]
    p: Option<PSpec>,
    #[arg(long, value_parser = parse_serde::<CovarianceAveraging>)]
    averaging: Option<CovarianceAveraging>,
    #[arg(long, value_parser = parse_serde::<CovarianceAveraging>)]
    exact_averaging: Option<CovarianceAveraging>,
    #[arg(long)]
    dense_cap: Option<usize>,
    #[arg(long)]
    krr_ridge: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    label_ratio: Option<f64>,
    #[arg(long)]
    n_labeled: Option<usize>,
    /// Comma-separated, strictly ascending.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
    /// `classification` or `rmse`.
    #[arg(long, value_parser = parse_serde::<Metric>)]
    metric: Option<Metric>,
    /// Held-out points per trial (inductive mode); 0 is transductive.
    #[arg(long)]
    test_points: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    num_circles: Option<usize>,
    #[arg(long)]
    inner_radius: Option<f64>,
    #[arg(long)]
    radius_step: Option<f64>,
    /// Records CSV; falls back to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn read_dataset(path: &Path) -> Result<SemiDataset> {
    SemiDataset::read_csv(open(path)?)
}

/// Writes `x0..,score,label` rows.
fn write_scores(out: &mut dyn Write, points: &[f64], d: usize, scores: &[f64]) -> Result<()> {
    let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    writeln!(out, "{},score,label", header.join(","))?;
    let labels = decode_sign(scores);
    for ((x, s), y) in points.chunks(d).zip(scores).zip(&labels) {
        let coords: Vec<String> = x.iter().map(f64::to_string).collect();
        writeln!(out, "{},{s},{y}", coords.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let ds = match args.family {
        Family::Circles => gen_circles(&CirclesSpec {
            n: args.n,
            n_labeled: args.n_labeled.unwrap_or(args.num_circles),
            num_circles: args.num_circles,
            inner_radius: args.inner_radius,
            radius_step: args.radius_step,
            seed: args.seed,
        })?,
        Family::Gauss2 => gen_gaussian_mix(&GaussianMixSpec {
            n: args.n,
            n_labeled: args.n_labeled.unwrap_or((args.n / 10).max(1)),
            d: args.d,
            delta: args.delta,
            seed: args.seed,
        })?,
    };
    ds.write_csv(sink(args.out.as_deref())?)
}

fn fit(args: FitArgs) -> Result<()> {
    let ds = read_dataset(&args.data)?;
    let (n, d) = (ds.n(), ds.d());
    if let Some(Baseline::Graph) = args.baseline {
        let g = GraphConfig::new(args.graph_sigma.resolve(n, d)?)?;
        let res = harmonic_propagate(&ds, &g)?;
        if res.regularized {
            eprintln!("warning: unlabeled block was singular; solved with jitter");
        }
        return write_scores(&mut *sink(args.out.as_deref())?, ds.unlabeled_inputs(), d, &res.values);
    }
    let kernel = GaussianKernel::new(args.sigma.resolve(n, d)?)?;
    let mu = args.mu.resolve(n);
    let model = match (args.baseline, args.method) {
        (Some(Baseline::Krr), _) => krr_fit(&ds, &kernel, args.krr_ridge)?,
        (_, FitMethod::KernelLaplacian) => fit_with(
            &ds,
            &kernel,
            args.p.resolve(n),
            mu,
            &FilterSpec::new(args.filter, args.lambda)?,
            args.seed,
            FitOptions {
                averaging: args.averaging,
                clip: args.clip,
                low_memory: args.low_memory,
            },
        )?,
        (_, FitMethod::Exact) => fit_exact_with(
            &ds,
            &kernel,
            args.lambda,
            mu,
            ExactOptions {
                cap: args.dense_cap,
                averaging: args.averaging,
                clip: args.clip,
            },
        )?,
    };
    let mut out = sink(args.out.as_deref())?;
    writeln!(out, "{}", model.to_json()?)?;
    out.flush()?;
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let model = FittedModel::load(&args.model)?;
    let (points, d) = read_points(open(&args.data)?)?;
    let scores = model.predict(&points)?;
    write_scores(&mut *sink(args.out.as_deref())?, &points, d, &scores)
}

fn eigvecs(args: EigvecsArgs) -> Result<()> {
    let ds = read_dataset(&args.data)?;
    let (n, d) = (ds.n(), ds.d());
    let grid = match &args.grid {
        Some(path) => {
            let (pts, gd) = read_points(open(path)?)?;
            if gd != d {
                return Err(Error::InvalidArgument(format!("grid has dimension {gd}, dataset has {d}")));
            }
            pts
        }
        None => ds.inputs().to_vec(),
    };
    let kernel = GaussianKernel::new(args.sigma.resolve(n, d)?)?;
    let ex = export_eigenvectors(&ds, &kernel, args.p.resolve(n), args.mu.resolve(n), args.count, &grid, args.seed)?;
    let values: Vec<String> = ex.eigenvalues.iter().map(|v| format!("{v:.6e}")).collect();
    eprintln!("eigenvalues: {}", values.join(" "));
    ex.write_csv(sink(args.out.as_deref())?)
}

/// Overlays `over`'s keys onto `base`, one level deep.
fn merge(base: &mut Value, over: Value) -> Result<()> {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            b.extend(o);
            Ok(())
        }
        _ => Err(Error::InvalidArgument("config file must hold a JSON object".into())),
    }
}

fn build_config(args: &BenchArgs) -> Result<ExperimentConfig> {
    let base = match &args.preset {
        Some(name) => ExperimentConfig::preset(name)?,
        None => ExperimentConfig::default(),
    };
    let mut cfg = match &args.config {
        Some(path) => {
            let mut value = serde_json::to_value(&base)?;
            merge(&mut value, serde_json::from_reader(open(path)?)?)?;
            serde_json::from_value(value)?
        }
        None => base,
    };
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = args.$field.clone() {
                cfg.$field = v;
            })*
        };
    }
    set!(
        family, methods, sigma, graph_sigma, filter, lambda, mu, p, averaging, exact_averaging,
        dense_cap, krr_ridge, seed, trials, label_ratio, n_grid, metric, test_points, workers, d,
        delta, num_circles, inner_radius, radius_step
    );
    if let Some(b) = args.krr_sigma {
        cfg.krr_sigma = Some(b);
    }
    if let Some(k) = args.n_labeled {
        cfg.n_labeled = Some(k);
    }
    if let Some(b) = args.baseline {
        let other = match b {
            Baseline::Graph => Method::Graph,
            Baseline::Krr => Method::Krr,
        };
        cfg.methods = vec![Method::KernelLaplacian, other];
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn bench(args: BenchArgs, timing: bool) -> Result<()> {
    let cfg = build_config(&args)?;
    let records = if timing { run_timing(&cfg)? } else { run_error_curve(&cfg)? };
    write_records(&records, sink(cfg.output.as_deref().map(Path::new))?)?;
    print_summary(&records);
    Ok(())
}

fn print_summary(records: &[BenchRecord]) {
    eprintln!("{:<18} {:>6} {:>6} {:>8} {:>10} {:>10} {:>12}", "method", "n", "ok", "failed", "mean", "std", "fit_s");
    for s in summarize(records) {
        eprintln!(
            "{:<18} {:>6} {:>6} {:>8} {:>10.4} {:>10.4} {:>12.4e}",
            s.method.name(),
            s.n,
            s.count,
            s.failures,
            s.mean_error,
            s.std_error,
            s.mean_fit_seconds
        );
    }
}

fn plot(args: PlotArgs) -> Result<()> {
    let records = read_records(open(&args.records)?)?;
    let mut out = sink(args.out.as_deref())?;
    out.write_all(plot_svg(&records).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Eigvecs(a) => eigvecs(a),
        Command::BenchError(a) => bench(a, false),
        Command::BenchTime(a) => bench(a, true),
        Command::Plot(a) => plot(a),
    }
}

fn main() {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        // A closed pipe (`lapreg ... | head`) is not a failure.
        if matches!(&e, Error::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
