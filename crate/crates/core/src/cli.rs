//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 for usage
//! errors, 2 when data cannot be read or a fit fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::baselines::{estimate_variances, fit_empirical_bayes, fit_gpr, fit_nystrom, fit_spgp, VarianceParams};
use crate::benchmarks::{
    load_ccpp, run_ccpp, run_replication_study, run_table1, run_table3, with_jobs, BenchmarkReport, Dataset,
    ExperimentConfig, TestFunction,
};
use crate::designs::{default_knot_count, next_knot, select_knots, SequentialStop, DEFAULT_TRIALS};
use crate::error::Error;
use crate::estimators::{
    default_lambda_grid, estimate_kernel_params, fit_fdp, fit_gprr, fit_krr, fit_krr_gcv, predict, FittedModel,
    KernelParamOptions, LambdaPolicy, Method,
};
use crate::interpolators::{KnotSet, RegressionBasis, SplineBoundary};
use crate::kernels::{KernelSpec, DEFAULT_THETA};
use crate::numerics::TracePolicy;

#[derive(Parser, Debug)]
#[command(name = "reconstruct", version, about = "Nonparametric regression by reconstruction")]
struct Cli {
    /// Worker threads for benchmarks and knot search.
    #[arg(long, global = true, env = "RECONSTRUCT_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a model to a CSV of inputs x1..xd and response y.
    Fit(FitArgs),
    /// Evaluate a fitted model at the rows of a CSV.
    Predict(PredictArgs),
    /// GCV score over a lambda grid.
    GcvScan(GcvArgs),
    /// Knot selection.
    #[command(subcommand)]
    Knots(KnotsCommand),
    /// Benchmark studies; every run needs --seed.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Print a summary of a model file.
    Inspect {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum GKind {
    None,
    Constant,
    Linear,
}

impl From<GKind> for RegressionBasis {
    fn from(g: GKind) -> Self {
        match g {
            GKind::None => RegressionBasis::None,
            GKind::Constant => RegressionBasis::Constant,
            GKind::Linear => RegressionBasis::Linear,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Boundary {
    NotAKnot,
    Natural,
}

impl From<Boundary> for SplineBoundary {
    fn from(b: Boundary) -> Self {
        match b {
            Boundary::NotAKnot => SplineBoundary::NotAKnot,
            Boundary::Natural => SplineBoundary::Natural,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct ModelArgs {
    #[arg(long)]
    data: PathBuf,
    /// gprr, krr, gpr, nystrom, spgp, eb or fdp.
    #[arg(long, default_value = "gprr")]
    method: String,
    /// Number of knots; defaults to 10 per input dimension.
    #[arg(long)]
    m: Option<usize>,
    /// Random subsets scored when choosing knots.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gaussian scale(s): one value for all inputs or one per input.
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    /// Matern smoothness (0.5, 1.5 or 2.5); switches to the Matern family.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, requires = "nu")]
    phi: Option<f64>,
    /// Estimate Gaussian scales by least squares, starting from --theta.
    #[arg(long)]
    estimate_theta: bool,
    /// Fixed penalty weight; default is no penalty when m <= n/5, else GCV.
    #[arg(long, conflicts_with = "gcv")]
    lambda: Option<f64>,
    /// Choose lambda by GCV over the default grid.
    #[arg(long)]
    gcv: bool,
    #[arg(long, value_enum, default_value = "linear")]
    g: GKind,
    #[arg(long, requires = "sigma2")]
    tau2: Option<f64>,
    #[arg(long, requires = "tau2")]
    sigma2: Option<f64>,
    #[arg(long, value_enum, default_value = "not-a-knot")]
    boundary: Boundary,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// CSV with columns x1..xd (a trailing y column is ignored).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GcvArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated lambdas; default is the standard 50-point grid.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum KnotsCommand {
    /// Best of --trials random subsets by the separation criterion.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add knots one at a time where the GPRR residual is largest.
    Sequential {
        #[command(flatten)]
        model: ModelArgs,
        /// Optional held-out CSV for test errors.
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long, default_value_t = 15)]
        iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BenchCommon {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    test_size: Option<usize>,
    /// Record wall-clock timings (makes reports differ between runs).
    #[arg(long)]
    timings: bool,
    /// Start from a JSON config instead of the defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    Table1 {
        #[arg(long, default_value = "I")]
        model: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long)]
        sigma: Option<f64>,
        /// Model II with the cosine terms of standard Ackley.
        #[arg(long)]
        ackley_standard: bool,
        #[command(flatten)]
        common: BenchCommon,
    },
    Table3 {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 80)]
        m: usize,
        #[arg(long)]
        draws: Option<usize>,
        #[command(flatten)]
        common: BenchCommon,
    },
    Replication {
        #[arg(long, default_value_t = 49)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        m: usize,
        /// Comma-separated noise levels.
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
        #[command(flatten)]
        common: BenchCommon,
    },
    Ccpp {
        /// CSV with columns AT,V,AP,RH,PE.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[command(flatten)]
        common: BenchCommon,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) | Error::UnknownFunction(msg) => Failure::Usage(msg),
            other => Failure::Run(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let jobs = cli.jobs;
    let outcome = with_jobs(jobs, move || dispatch(cli.command)).unwrap_or_else(|e| Err(e.into()));
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Fit(a) => fit_command(a),
        Command::Predict(a) => predict_command(a),
        Command::GcvScan(a) => gcv_command(a),
        Command::Knots(k) => knots_command(k),
        Command::Bench(b) => bench_command(b),
        Command::Inspect { model } => inspect_command(&model),
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Run(e.into())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Run(e.into())),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Run(e.into()))
}

/// Everything a fit depends on, with defaults filled in.
#[derive(Debug, Serialize)]
struct ResolvedFit {
    method: Method,
    data: PathBuf,
    n: usize,
    d: usize,
    m: usize,
    trials: usize,
    seed: u64,
    kernel: Option<KernelSpec>,
    estimate_theta: bool,
    lambda: LambdaPolicy,
    g: GKind,
    variances: Option<VarianceParams>,
    boundary: Boundary,
    knot_indices: Vec<usize>,
}

fn base_kernel(a: &ModelArgs, d: usize) -> CliResult<KernelSpec> {
    if let Some(nu) = a.nu {
        if a.estimate_theta {
            return Err(Failure::Usage("--estimate-theta applies to the Gaussian kernel".into()));
        }
        return Ok(KernelSpec::matern(nu, a.phi.unwrap_or(1.0))?);
    }
    let theta = match a.theta.len() {
        0 => vec![DEFAULT_THETA; d],
        1 => vec![a.theta[0]; d],
        k if k == d => a.theta.clone(),
        k => return Err(Failure::Usage(format!("--theta has {k} values for {d} inputs"))),
    };
    Ok(KernelSpec::gaussian(theta)?)
}

fn lambda_policy(a: &ModelArgs, m: usize, n: usize) -> LambdaPolicy {
    match (a.lambda, a.gcv) {
        (Some(0.0), _) => LambdaPolicy::None,
        (Some(lambda), _) => LambdaPolicy::Fixed { lambda },
        (None, true) => LambdaPolicy::gcv_default(),
        (None, false) => LambdaPolicy::auto(m, n),
    }
}

struct Prepared {
    data: Dataset,
    resolved: ResolvedFit,
    knots: Option<KnotSet>,
}

fn prepare(a: &ModelArgs) -> CliResult<Prepared> {
    let method: Method = a.method.parse()?;
    if method == Method::Replication {
        return Err(Failure::Usage("replication designs are run through `bench replication`".into()));
    }
    let data = Dataset::from_csv(&a.data)?;
    let (n, d) = (data.len(), data.dim());
    let uses_knots = matches!(method, Method::Gprr | Method::Nystrom | Method::Spgp | Method::Eb);
    let m = match method {
        Method::Krr | Method::Gpr | Method::Fdp => n,
        _ => a.m.unwrap_or_else(|| default_knot_count(d)).min(n),
    };
    if a.m == Some(0) {
        return Err(Failure::Usage("--m must be positive".into()));
    }
    let (knots, knot_indices) = if !uses_knots {
        (None, Vec::new())
    } else if m == n {
        (Some(KnotSet::new(data.x.clone())?), (0..n).collect())
    } else {
        let sel = select_knots(&data.x, m, a.trials, a.seed)?;
        (Some(sel.knots), sel.indices)
    };
    let mut kernel = if method == Method::Fdp { None } else { Some(base_kernel(a, d)?) };
    if a.estimate_theta {
        let (Some(k), Some(kn)) = (&kernel, &knots) else {
            return Err(Failure::Usage("--estimate-theta needs a knot-based method".into()));
        };
        let KernelSpec::Gaussian { theta } = k else { unreachable!() };
        let est = estimate_kernel_params(&data.x, &data.y, kn, a.g.into(), theta, &KernelParamOptions::default())?;
        kernel = Some(KernelSpec::gaussian(est.theta)?);
    }
    let variances = match (a.tau2, a.sigma2) {
        (Some(t), Some(s)) => Some(VarianceParams::new(t, s)?),
        _ => None,
    };
    let resolved = ResolvedFit {
        method,
        data: a.data.clone(),
        n,
        d,
        m,
        trials: a.trials,
        seed: a.seed,
        kernel,
        estimate_theta: a.estimate_theta,
        lambda: lambda_policy(a, m, n),
        g: a.g,
        variances,
        boundary: a.boundary,
        knot_indices,
    };
    Ok(Prepared { data, resolved, knots })
}

fn fit_prepared(p: &mut Prepared) -> CliResult<FittedModel> {
    let r = &mut p.resolved;
    let (x, y) = (&p.data.x, &p.data.y);
    let g: RegressionBasis = r.g.into();
    let model = match r.method {
        Method::Fdp => fit_fdp(y, &r.lambda, TracePolicy::Exact, r.boundary.into())?.to_model()?,
        method => {
            let kernel = r.kernel.clone().ok_or_else(|| Failure::Usage("missing kernel".into()))?;
            match method {
                Method::Krr => match &r.lambda {
                    LambdaPolicy::Gcv { grid } => fit_krr_gcv(x, y, &kernel, grid)?,
                    LambdaPolicy::Fixed { lambda } => fit_krr(x, y, &kernel, *lambda)?,
                    LambdaPolicy::None => fit_krr(x, y, &kernel, 0.0)?,
                },
                Method::Gpr => fit_gpr(x, y, &kernel, g, &r.lambda)?,
                _ => {
                    let knots = p.knots.as_ref().ok_or_else(|| Failure::Usage("missing knots".into()))?;
                    match method {
                        Method::Gprr => fit_gprr(x, y, knots, &kernel, g, &r.lambda)?,
                        Method::Nystrom => fit_nystrom(x, y, knots, &kernel, g, &r.lambda)?,
                        _ => {
                            let vp = match r.variances {
                                Some(vp) => vp,
                                None => estimate_variances(x, y, knots, &kernel)?,
                            };
                            r.variances = Some(vp);
                            if method == Method::Spgp {
                                fit_spgp(x, y, knots, &kernel, &vp)?
                            } else {
                                fit_empirical_bayes(x, y, knots, &kernel, &vp)?
                            }
                        }
                    }
                }
            }
        }
    };
    Ok(model)
}

fn fit_command(a: FitArgs) -> CliResult<()> {
    let mut p = prepare(&a.model)?;
    let model = fit_prepared(&mut p)?;
    let mut value = serde_json::to_value(&model).map_err(|e| Failure::Run(e.into()))?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert(
            "config".into(),
            serde_json::to_value(&p.resolved).map_err(|e| Failure::Run(e.into()))?,
        );
    }
    emit(a.out.as_deref(), &to_json(&value)?)
}

fn load_model(path: &Path) -> CliResult<FittedModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Run(e.into()))?;
    Ok(FittedModel::from_json(&text)?)
}

/// Reads prediction inputs: `d` columns, or `d + 1` with the last ignored.
fn read_points(path: &Path, d: usize) -> CliResult<DMatrix<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Failure::Run(e.into()))?;
    let width = reader.headers().map_err(|e| Failure::Run(e.into()))?.len();
    if width != d && width != d + 1 {
        return Err(Failure::Run(Error::BadSchema(format!(
            "model takes {d} inputs, file has {width} columns"
        ))));
    }
    let mut vals = Vec::new();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Failure::Run(e.into()))?;
        for field in rec.iter().take(d) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Failure::Run(Error::BadSchema(format!("{field:?} is not a number"))))?;
            vals.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, d, &vals))
}

fn predict_command(a: PredictArgs) -> CliResult<()> {
    let model = load_model(&a.model)?;
    let x = read_points(&a.data, model.dim())?;
    let p = predict(&model, &x)?;
    let mut text = String::new();
    let header: Vec<String> = (1..=model.dim()).map(|j| format!("x{j}")).chain(["yhat".to_string()]).collect();
    text.push_str(&header.join(","));
    for i in 0..x.nrows() {
        text.push('\n');
        let row: Vec<String> = x.row(i).iter().chain([p[i]].iter()).map(|v| v.to_string()).collect();
        text.push_str(&row.join(","));
    }
    emit(a.out.as_deref(), &text)
}

#[derive(Serialize)]
struct GcvScan {
    config: ResolvedFit,
    lambda: Vec<f64>,
    gcv: Vec<Option<f64>>,
    best: Option<f64>,
}

fn gcv_command(a: GcvArgs) -> CliResult<()> {
    let mut p = prepare(&a.model)?;
    if matches!(p.resolved.method, Method::Spgp | Method::Eb) {
        return Err(Failure::Usage("GCV scans apply to gprr, krr, gpr, nystrom and fdp".into()));
    }
    let grid = if a.grid.is_empty() { default_lambda_grid() } else { a.grid };
    let mut scores = Vec::with_capacity(grid.len());
    for &lambda in &grid {
        p.resolved.lambda = LambdaPolicy::Fixed { lambda };
        let score = fit_prepared(&mut p).ok().and_then(|m| m.diagnostics.gcv);
        scores.push(score);
    }
    let best = grid
        .iter()
        .zip(&scores)
        .filter_map(|(l, s)| s.map(|s| (*l, s)))
        .fold(None, |acc: Option<(f64, f64)>, (l, s)| match acc {
            Some((_, b)) if b <= s => acc,
            _ => Some((l, s)),
        })
        .map(|(l, _)| l);
    p.resolved.lambda = LambdaPolicy::Gcv { grid: grid.clone() };
    let scan = GcvScan {
        config: p.resolved,
        lambda: grid,
        gcv: scores,
        best,
    };
    emit(a.out.as_deref(), &to_json(&scan)?)
}

#[derive(Serialize)]
struct SequentialReport {
    config: ResolvedFit,
    iterations: usize,
    steps: Vec<SequentialRow>,
    knot_indices: Vec<usize>,
}

#[derive(Serialize)]
struct SequentialRow {
    m: usize,
    added: Option<usize>,
    gcv: Option<f64>,
    test_error: Option<f64>,
}

fn knots_command(k: KnotsCommand) -> CliResult<()> {
    match k {
        KnotsCommand::Select { data, m, trials, seed, out } => {
            let data = Dataset::from_csv(&data)?;
            let m = m.unwrap_or_else(|| default_knot_count(data.dim())).min(data.len());
            let sel = select_knots(&data.x, m, trials, seed)?;
            emit(out.as_deref(), &to_json(&sel)?)
        }
        KnotsCommand::Sequential { model, test, iterations, out } => {
            if !model.method.eq_ignore_ascii_case("gprr") {
                return Err(Failure::Usage("sequential knot addition uses gprr".into()));
            }
            let mut p = prepare(&model)?;
            let test = test.map(|t| Dataset::from_csv(&t)).transpose()?;
            let stop = SequentialStop {
                max_additions: iterations,
                ..SequentialStop::default()
            };
            let mut chosen = p.resolved.knot_indices.clone();
            let mut steps = Vec::new();
            let mut history = Vec::new();
            let mut added = None;
            loop {
                p.knots = Some(KnotSet::subset(&p.data.x, &chosen)?);
                p.resolved.m = chosen.len();
                let fitted = fit_prepared(&mut p)?;
                let gcv = fitted.diagnostics.gcv;
                let test_error = match &test {
                    Some(t) => Some(crate::benchmarks::evaluate(&fitted, &t.x, &t.y)?),
                    None => None,
                };
                steps.push(SequentialRow { m: chosen.len(), added, gcv, test_error });
                history.push(gcv.unwrap_or(f64::INFINITY));
                if stop.should_stop(&history) {
                    break;
                }
                match next_knot(&p.data.x, &chosen, p.data.y.as_slice(), &fitted) {
                    Ok(i) => {
                        chosen.push(i);
                        added = Some(i);
                    }
                    Err(Error::NoCandidatesLeft) => break,
                    Err(e) => return Err(e.into()),
                }
            }
            p.resolved.knot_indices = chosen.clone();
            let report = SequentialReport {
                config: p.resolved,
                iterations,
                steps,
                knot_indices: chosen,
            };
            emit(out.as_deref(), &to_json(&report)?)
        }
    }
}

fn bench_config(common: &BenchCommon, default: ExperimentConfig) -> CliResult<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Run(e.into()))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("bad config file: {e}")))?
        }
        None => default,
    };
    config.seed = common.seed;
    if let Some(r) = common.reps {
        config.repetitions = r;
    }
    if let Some(t) = common.test_size {
        config.test_size = t;
    }
    config.record_timings |= common.timings;
    config.validate()?;
    Ok(config)
}

fn write_report(report: &BenchmarkReport, out: Option<&Path>) -> CliResult<()> {
    emit(out, &report.to_json()?)
}

fn bench_command(b: BenchCommand) -> CliResult<()> {
    match b {
        BenchCommand::Table1 { model, d, n, sigma, ackley_standard, common } => {
            let function: TestFunction = model.parse()?;
            let mut config = bench_config(&common, ExperimentConfig::table1(function, d, n, common.seed))?;
            if common.config.is_none() {
                config.ackley_standard = ackley_standard;
                if let Some(s) = sigma {
                    config.sigma = s;
                }
            }
            config.validate()?;
            write_report(&run_table1(&config)?, common.out.as_deref())
        }
        BenchCommand::Table3 { n, m, draws, common } => {
            let mut config = bench_config(&common, ExperimentConfig::table3(n, m, common.seed))?;
            if let Some(k) = draws {
                config.inner_draws = k;
            }
            config.validate()?;
            write_report(&run_table3(&config)?, common.out.as_deref())
        }
        BenchCommand::Replication { n, m, sigmas, common } => {
            let mut config = bench_config(&common, ExperimentConfig::replication(n, m, common.seed))?;
            if !sigmas.is_empty() {
                config.sigma_grid = sigmas;
            }
            config.validate()?;
            write_report(&run_replication_study(&config)?, common.out.as_deref())
        }
        BenchCommand::Ccpp { data, iterations, trials, common } => {
            let split = load_ccpp(&data)?;
            if let Some(w) = &split.warning {
                eprintln!("warning: {w}");
            }
            let mut config = bench_config(&common, ExperimentConfig::ccpp(common.seed))?;
            if let Some(i) = iterations {
                config.iterations = Some(i);
            }
            if let Some(t) = trials {
                config.knot_trials = Some(t);
            }
            config.n = split.train.len();
            config.test_size = split.test.len();
            config.validate()?;
            write_report(&run_ccpp(&split, &config)?, common.out.as_deref())
        }
    }
}

fn inspect_command(path: &Path) -> CliResult<()> {
    let m = load_model(path)?;
    let mut lines = vec![
        format!("method       {}", m.method),
        format!("interpolator {:?}", m.interpolator),
        format!("knots        {} in {} dimension(s)", m.knots.len(), m.dim()),
        format!("lambda       {:e}", m.lambda),
        format!("trend        {:?}", m.g_kind),
    ];
    if let Some(k) = &m.kernel {
        lines.push(format!("kernel       {}", serde_json::to_string(k).unwrap_or_default()));
    }
    if let Some(g) = m.diagnostics.gcv {
        lines.push(format!("gcv          {g:.6e}"));
    }
    if let Some(t) = m.diagnostics.trace {
        lines.push(format!("trace(H)     {t:.4}"));
    }
    if m.diagnostics.jitter > 0.0 {
        lines.push(format!("jitter       {:e}", m.diagnostics.jitter));
    }
    let (lo, hi) = m
        .gamma_hat
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    lines.push(format!("gamma range  [{lo:.6}, {hi:.6}]"));
    emit(None, &lines.join("\n"))
}

