use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::data::{evaluate, mise_1d, simulate_with, truth_values, uniform_points, CcppSplit, Dataset};
use super::functions::{eval, TestFunction};
use super::{summarize, BenchmarkReport, ExperimentConfig, KnotRecord, RunRecord, SequentialStep, SequentialTrace, Study, ThetaPolicy};
use crate::baselines::{estimate_variances, fit_empirical_bayes, fit_gpr, fit_nystrom, fit_spgp, VarianceParams};
use crate::designs::{chebyshev_knots, equispaced_knots, next_knot, replication_design, select_knots, SequentialStop};
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    estimate_kernel_params, fit_gprr, fit_krr, fit_krr_gcv, fit_replication, FittedModel, InterpolatorKind,
    LambdaPolicy, Method,
};
use crate::interpolators::{KernelExpansion, KnotSet, RegressionBasis, SplineBoundary};
use crate::kernels::KernelSpec;

/// Runs `f` on a pool of `jobs` threads, or on the global pool when `None`.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(invalid("jobs must be positive")),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| invalid(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Outcome of one fit plus the wall-clock time it took.
struct Outcome {
    record: RunRecord,
    seconds: f64,
}

struct Fit {
    model: FittedModel,
    theta: Option<Vec<f64>>,
    variances: Option<VarianceParams>,
}

impl From<FittedModel> for Fit {
    fn from(model: FittedModel) -> Self {
        Fit {
            model,
            theta: None,
            variances: None,
        }
    }
}

fn outcome(
    rep: usize,
    draw: usize,
    method: &str,
    start: Instant,
    result: Result<(Fit, f64)>,
) -> Outcome {
    let mut record = RunRecord {
        rep,
        draw,
        method: method.to_string(),
        sigma: None,
        mse: None,
        lambda: None,
        theta: None,
        variances: None,
        error: None,
    };
    match result {
        Ok((fit, mse)) => {
            record.mse = Some(mse);
            record.lambda = Some(fit.model.lambda);
            record.theta = fit.theta;
            record.variances = fit.variances;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    Outcome {
        record,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn finish(
    config: &ExperimentConfig,
    protocol: String,
    outcomes: Vec<Outcome>,
    knots: Vec<KnotRecord>,
    sequential: Option<SequentialTrace>,
) -> BenchmarkReport {
    let timings = config.record_timings.then(|| {
        let mut t: BTreeMap<String, f64> = BTreeMap::new();
        for o in &outcomes {
            *t.entry(o.record.method.clone()).or_default() += o.seconds;
        }
        t
    });
    let per_run: Vec<RunRecord> = outcomes.into_iter().map(|o| o.record).collect();
    BenchmarkReport {
        config: config.clone(),
        protocol,
        summary: summarize(&per_run),
        per_run,
        knots,
        sequential,
        timings,
        seed: config.seed,
    }
}

fn expect_study(config: &ExperimentConfig, study: Study) -> Result<()> {
    config.validate()?;
    if config.study != study {
        return Err(invalid(format!("config is for {:?}, not {study:?}", config.study)));
    }
    Ok(())
}

fn rep_rng(config: &ExperimentConfig, rep: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(rep as u64))
}

/// Adds a constant to a kernel expansion without a trend.
fn with_offset(mut model: FittedModel, c: f64) -> Result<FittedModel> {
    let e = model
        .expansion
        .take()
        .ok_or_else(|| invalid("model has no expansion"))?;
    if e.regression() != RegressionBasis::None {
        return Err(invalid("offset applies to trend-free expansions"));
    }
    model.expansion = Some(KernelExpansion::new(
        e.kernel().clone(),
        RegressionBasis::Constant,
        &e.centers(),
        vec![c],
        e.weights().to_vec(),
    )?);
    model.g_kind = RegressionBasis::Constant;
    for g in model.gamma_hat.iter_mut() {
        *g += c;
    }
    Ok(model)
}

/// SPGP or empirical Bayes on the centered response, with variances by
/// maximum marginal likelihood.
fn fit_sparse(method: Method, x: &DMatrix<f64>, y: &DVector<f64>, knots: &KnotSet, kernel: &KernelSpec) -> Result<Fit> {
    let mean = y.mean();
    let yc = y.add_scalar(-mean);
    let vp = estimate_variances(x, &yc, knots, kernel)?;
    let model = match method {
        Method::Spgp => fit_spgp(x, &yc, knots, kernel, &vp)?,
        _ => fit_empirical_bayes(x, &yc, knots, kernel, &vp)?,
    };
    Ok(Fit {
        model: with_offset(model, mean)?,
        theta: None,
        variances: Some(vp),
    })
}

fn fixed_theta(config: &ExperimentConfig) -> Result<f64> {
    match config.theta {
        ThetaPolicy::Fixed { value } => Ok(value),
        ThetaPolicy::Estimate { .. } => Err(invalid("this study uses a fixed theta")),
    }
}

fn estimate_theta(config: &ExperimentConfig, data: &Dataset, knots: &KnotSet) -> Result<Vec<f64>> {
    match &config.theta {
        ThetaPolicy::Fixed { value } => Ok(vec![*value; data.dim()]),
        ThetaPolicy::Estimate { start, options } => Ok(estimate_kernel_params(
            &data.x,
            &data.y,
            knots,
            RegressionBasis::Linear,
            &vec![*start; data.dim()],
            options,
        )?
        .theta),
    }
}

const TABLE1_PROTOCOL: &str = "Gaussian kernel with the configured theta in every coordinate; \
KRR without trend, GPR and GPRR (knots = data) with trend (1, x); lambda per the configured policy.";

/// Repeated simulate / fit / test-error runs for KRR, GPR and GPRR with the
/// knots equal to the data.
pub fn run_table1(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    expect_study(config, Study::Table1)?;
    let kernel = KernelSpec::gaussian_iso(config.d, fixed_theta(config)?)?;
    let truth = config.truth();
    let outcomes: Vec<Vec<Outcome>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(config, rep);
            let data = simulate_with(&truth, config.d, config.n, config.sigma, &mut rng);
            let xt = uniform_points(config.test_size, config.d, &mut rng);
            let ft = truth_values(&truth, &xt);
            config
                .methods
                .iter()
                .map(|&method| {
                    let start = Instant::now();
                    let fit = match method {
                        Method::Krr => match &config.lambda {
                            LambdaPolicy::Gcv { grid } => fit_krr_gcv(&data.x, &data.y, &kernel, grid),
                            other => other
                                .fixed_value()
                                .and_then(|l| fit_krr(&data.x, &data.y, &kernel, l.unwrap_or(0.0))),
                        },
                        Method::Gpr => fit_gpr(&data.x, &data.y, &kernel, RegressionBasis::Linear, &config.lambda),
                        _ => KnotSet::new(data.x.clone()).and_then(|knots| {
                            fit_gprr(&data.x, &data.y, &knots, &kernel, RegressionBasis::Linear, &config.lambda)
                        }),
                    };
                    let result = fit.and_then(|m| {
                        let mse = evaluate(&m, &xt, &ft)?;
                        Ok((Fit::from(m), mse))
                    });
                    outcome(rep, 0, method.name(), start, result)
                })
                .collect()
        })
        .collect();
    Ok(finish(config, TABLE1_PROTOCOL.into(), outcomes.into_iter().flatten().collect(), Vec::new(), None))
}

const TABLE3_PROTOCOL: &str = "Knots: random m-subsets of the training inputs. Gaussian theta: \
estimated once per repetition by least squares at the first knot draw (GPRR objective, trend (1, x)) \
and shared by all methods. GPRR: trend (1, x), configured lambda policy. Nystrom: trend (1, x), \
lambda by GCV on the default grid. SPGP/EB: centered response, (tau2, sigma2) by marginal-likelihood \
coordinate grid search, mean added back.";

fn fit_with_knots(
    method: Method,
    data: &Dataset,
    knots: &KnotSet,
    kernel: &KernelSpec,
    lambda: &LambdaPolicy,
) -> Result<Fit> {
    match method {
        Method::Gprr => Ok(fit_gprr(&data.x, &data.y, knots, kernel, RegressionBasis::Linear, lambda)?.into()),
        Method::Nystrom => Ok(fit_nystrom(
            &data.x,
            &data.y,
            knots,
            kernel,
            RegressionBasis::Linear,
            &LambdaPolicy::gcv_default(),
        )?
        .into()),
        Method::Spgp | Method::Eb => fit_sparse(method, &data.x, &data.y, knots, kernel),
        other => Err(invalid(format!("{other} does not take a knot set"))),
    }
}

/// Outer repetitions draw fresh data; inner draws pick random knot subsets.
pub fn run_table3(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    expect_study(config, Study::Table3)?;
    let m = config.m.unwrap_or(0);
    let truth = config.truth();
    let per_rep: Vec<(Vec<Outcome>, Vec<KnotRecord>)> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(config, rep);
            let data = simulate_with(&truth, config.d, config.n, config.sigma, &mut rng);
            let xt = uniform_points(config.test_size, config.d, &mut rng);
            let ft = truth_values(&truth, &xt);
            let draws: Vec<Vec<usize>> = (0..config.inner_draws)
                .map(|_| sample(&mut rng, config.n, m).into_vec())
                .collect();
            let theta = KnotSet::subset(&data.x, &draws[0])
                .and_then(|k| estimate_theta(config, &data, &k))
                .and_then(|t| Ok((KernelSpec::gaussian(t.clone())?, t)));
            let outcomes: Vec<Vec<Outcome>> = draws
                .par_iter()
                .enumerate()
                .map(|(draw, idx)| {
                    config
                        .methods
                        .iter()
                        .map(|&method| {
                            let start = Instant::now();
                            let result = match &theta {
                                Err(e) => Err(Error::SingularSystem(format!("theta estimation failed: {e}"))),
                                Ok((kernel, t)) => KnotSet::subset(&data.x, idx)
                                    .and_then(|knots| fit_with_knots(method, &data, &knots, kernel, &config.lambda))
                                    .and_then(|mut fit| {
                                        fit.theta = Some(t.clone());
                                        let mse = evaluate(&fit.model, &xt, &ft)?;
                                        Ok((fit, mse))
                                    }),
                            };
                            outcome(rep, draw, method.name(), start, result)
                        })
                        .collect()
                })
                .collect();
            let knots = draws
                .into_iter()
                .enumerate()
                .map(|(draw, indices)| KnotRecord { rep, draw, indices })
                .collect();
            (outcomes.into_iter().flatten().collect(), knots)
        })
        .collect();
    let mut outcomes = Vec::new();
    let mut knots = Vec::new();
    for (o, k) in per_rep {
        outcomes.extend(o);
        knots.extend(k);
    }
    Ok(finish(config, TABLE3_PROTOCOL.into(), outcomes, knots, None))
}

const REPLICATION_PROTOCOL: &str = "Polynomial reconstruction on Chebyshev knots and not-a-knot \
spline reconstruction on equispaced knots, n / m replications per knot, knot means as estimates; \
error = trapezoid integral of the squared error on a grid of test_size points. One standard-normal \
noise vector per repetition is scaled by each sigma.";

/// Integrated squared error of the two replication-design estimators on
/// f1d over repetitions and noise levels.
pub fn run_replication_study(config: &ExperimentConfig) -> Result<BenchmarkReport> {
    expect_study(config, Study::Replication)?;
    let m = config.m.unwrap_or(0);
    let l = config.n / m;
    let designs = [
        ("polynomial", InterpolatorKind::Lagrange, replication_design(&chebyshev_knots(m)?, l)?),
        ("spline", InterpolatorKind::Spline, replication_design(&equispaced_knots(m)?, l)?),
    ];
    let sigmas = if config.sigma_grid.is_empty() {
        vec![config.sigma]
    } else {
        config.sigma_grid.clone()
    };
    let f = |t: f64| eval(TestFunction::F1d, &[t]);
    let outcomes: Vec<Vec<Outcome>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(config, rep);
            let noise: Vec<f64> = (0..config.n).map(|_| rng.sample(StandardNormal)).collect();
            let mut out = Vec::new();
            for &sigma in &sigmas {
                for (label, kind, design) in &designs {
                    let start = Instant::now();
                    let y = DVector::from_iterator(
                        design.len(),
                        design.points().iter().zip(&noise).map(|(t, e)| f(*t) + sigma * e),
                    );
                    let result = fit_replication(design, &y, *kind, SplineBoundary::NotAKnot).and_then(|model| {
                        let mise = mise_1d(&model, f, config.test_size)?;
                        Ok((Fit::from(model), mise))
                    });
                    let mut o = outcome(rep, 0, label, start, result);
                    o.record.sigma = Some(sigma);
                    o.record.lambda = None;
                    out.push(o);
                }
            }
            out
        })
        .collect();
    Ok(finish(config, REPLICATION_PROTOCOL.into(), outcomes.into_iter().flatten().collect(), Vec::new(), None))
}

/// Knots chosen by design criterion plus the shared Gaussian kernel.
fn ccpp_setup(split: &CcppSplit, config: &ExperimentConfig) -> Result<(Vec<usize>, KernelSpec, Vec<f64>)> {
    expect_study(config, Study::Ccpp)?;
    let train = &split.train;
    if train.dim() != config.d {
        return Err(invalid(format!("config has d = {}, data have {} features", config.d, train.dim())));
    }
    let m = config.m.unwrap_or(0).min(train.len());
    let trials = config.knot_trials.unwrap_or(crate::designs::DEFAULT_TRIALS);
    let selection = select_knots(&train.x, m, trials, config.seed)?;
    let theta = estimate_theta(config, train, &selection.knots)?;
    Ok((selection.indices, KernelSpec::gaussian(theta.clone())?, theta))
}

fn sequential(
    split: &CcppSplit,
    config: &ExperimentConfig,
    indices: &[usize],
    kernel: &KernelSpec,
) -> Result<SequentialTrace> {
    let (train, test) = (&split.train, &split.test);
    let stop = SequentialStop {
        max_additions: config.iterations.unwrap_or(15),
        ..SequentialStop::default()
    };
    let mut chosen = indices.to_vec();
    let mut steps = Vec::new();
    let mut history = Vec::new();
    let mut added = None;
    loop {
        let knots = KnotSet::subset(&train.x, &chosen)?;
        let model = fit_gprr(&train.x, &train.y, &knots, kernel, RegressionBasis::Linear, &config.lambda)?;
        let gcv = model.diagnostics.gcv.unwrap_or(f64::INFINITY);
        steps.push(SequentialStep {
            m: chosen.len(),
            added,
            gcv,
            test_error: evaluate(&model, &test.x, &test.y)?,
        });
        history.push(gcv);
        if stop.should_stop(&history) {
            break;
        }
        match next_knot(&train.x, &chosen, train.y.as_slice(), &model) {
            Ok(i) => {
                chosen.push(i);
                added = Some(i);
            }
            Err(Error::NoCandidatesLeft) => break,
            Err(e) => return Err(e),
        }
    }
    let stopped_early = steps.len() <= stop.max_additions;
    Ok(SequentialTrace { steps, stopped_early })
}

/// GCV and test error of GPRR as knots are added one at a time, starting
/// from `m` knots chosen by design criterion.
pub fn run_ccpp_sequential(split: &CcppSplit, config: &ExperimentConfig) -> Result<SequentialTrace> {
    let (indices, kernel, _) = ccpp_setup(split, config)?;
    sequential(split, config, &indices, &kernel)
}

const CCPP_PROTOCOL: &str = "Knots: best of knot_trials random m-subsets of the training inputs by \
the separation criterion. Gaussian theta by least squares for GPRR with trend (1, x), shared by all \
methods. Nystrom lambda by GCV; SPGP/EB variances by marginal likelihood on the centered response. \
Sequential: add the training point with the largest residual, refit, up to `iterations` additions or \
until GCV stalls.";

/// Test errors of the requested methods on the power-plant split, then the
/// sequential knot additions for GPRR.
pub fn run_ccpp(split: &CcppSplit, config: &ExperimentConfig) -> Result<BenchmarkReport> {
    let (indices, kernel, theta) = ccpp_setup(split, config)?;
    let knots = KnotSet::subset(&split.train.x, &indices)?;
    let outcomes: Vec<Outcome> = config
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let result = fit_with_knots(method, &split.train, &knots, &kernel, &config.lambda).and_then(|mut fit| {
                fit.theta = Some(theta.clone());
                let mse = evaluate(&fit.model, &split.test.x, &split.test.y)?;
                Ok((fit, mse))
            });
            outcome(0, 0, method.name(), start, result)
        })
        .collect();
    let trace = sequential(split, config, &indices, &kernel)?;
    let record = KnotRecord {
        rep: 0,
        draw: 0,
        indices,
    };
    let mut protocol = CCPP_PROTOCOL.to_string();
    if let Some(w) = &split.warning {
        protocol.push_str(&format!(" Data warning: {w}."));
    }
    Ok(finish(config, protocol, outcomes, vec![record], Some(trace)))
}
