//! Test functions, simulated and real data, and the experiment drivers that
//! produce [`BenchmarkReport`]s.

mod data;
mod drivers;
mod functions;

pub use data::{evaluate, load_ccpp, mise_1d, simulate, CcppSplit, Dataset, CCPP_COLUMNS, CCPP_ROWS, CCPP_TRAIN_ROWS};
pub use drivers::{run_ccpp, run_ccpp_sequential, run_replication_study, run_table1, run_table3, with_jobs};
pub use functions::{ackley_standard, borehole, borehole_inputs, test_function, TestFunction, BOREHOLE_RANGES};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::baselines::VarianceParams;
use crate::error::{invalid, Result};
use crate::estimators::{KernelParamOptions, LambdaPolicy, Method};
use crate::kernels::DEFAULT_THETA;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Table1,
    Table3,
    Replication,
    Ccpp,
}

/// Starting scale for kernel-parameter estimation on borehole inputs.
pub const TABLE3_THETA_START: f64 = 0.1;

/// Gaussian kernel scales used by a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theta", rename_all = "snake_case")]
pub enum ThetaPolicy {
    /// The same scale in every coordinate.
    Fixed { value: f64 },
    /// Estimated once per repetition from the first knot draw, starting at
    /// `start` in every coordinate, and shared by all methods.
    Estimate {
        start: f64,
        options: KernelParamOptions,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub study: Study,
    pub function: TestFunction,
    /// Use the cosine form of model II.
    #[serde(default)]
    pub ackley_standard: bool,
    pub d: usize,
    pub n: usize,
    pub sigma: f64,
    /// Knots per fit (replication study: distinct design points).
    #[serde(default)]
    pub m: Option<usize>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    /// Random knot subsets per repetition.
    pub inner_draws: usize,
    pub test_size: usize,
    pub seed: u64,
    pub lambda: LambdaPolicy,
    pub theta: ThetaPolicy,
    /// Noise levels swept by the replication study.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sigma_grid: Vec<f64>,
    /// Candidate subsets scored when knots are chosen by design criterion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knot_trials: Option<usize>,
    /// Knot additions in the sequential study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Wall-clock timings make reports differ run to run; off by default.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    /// Reduced-size comparison of KRR, GPR and GPRR at `A = X`: 20
    /// repetitions, 2000 test points, unit noise, `theta = 12.5`, GCV.
    pub fn table1(function: TestFunction, d: usize, n: usize, seed: u64) -> Self {
        Self {
            study: Study::Table1,
            function,
            ackley_standard: false,
            d,
            n,
            sigma: 1.0,
            m: None,
            methods: vec![Method::Krr, Method::Gpr, Method::Gprr],
            repetitions: 20,
            inner_draws: 1,
            test_size: 2000,
            seed,
            lambda: LambdaPolicy::gcv_default(),
            theta: ThetaPolicy::Fixed { value: DEFAULT_THETA },
            sigma_grid: Vec::new(),
            knot_trials: None,
            iterations: None,
            record_timings: false,
        }
    }

    /// Reduced-size borehole comparison of Nystrom, SPGP and GPRR with
    /// `m < n`: 5 repetitions of 10 random knot subsets.
    pub fn table3(n: usize, m: usize, seed: u64) -> Self {
        Self {
            study: Study::Table3,
            function: TestFunction::Borehole,
            ackley_standard: false,
            d: 8,
            n,
            sigma: 1.0,
            m: Some(m),
            methods: vec![Method::Nystrom, Method::Spgp, Method::Gprr],
            repetitions: 5,
            inner_draws: 10,
            test_size: 2000,
            seed,
            lambda: LambdaPolicy::auto(m, n),
            theta: ThetaPolicy::Estimate {
                start: TABLE3_THETA_START,
                options: KernelParamOptions {
                    max_iter: 5,
                    golden_iters: 25,
                    ..KernelParamOptions::default()
                },
            },
            sigma_grid: Vec::new(),
            knot_trials: None,
            iterations: None,
            record_timings: false,
        }
    }

    /// Replication designs on f1d: `m` knots with `n / m` observations each,
    /// over a grid of noise levels.
    pub fn replication(n: usize, m: usize, seed: u64) -> Self {
        Self {
            study: Study::Replication,
            function: TestFunction::F1d,
            ackley_standard: false,
            d: 1,
            n,
            sigma: 0.3,
            m: Some(m),
            methods: vec![Method::Replication],
            repetitions: 100,
            inner_draws: 1,
            test_size: 1001,
            seed,
            lambda: LambdaPolicy::None,
            theta: ThetaPolicy::Fixed { value: DEFAULT_THETA },
            sigma_grid: (1..=11).map(|k| k as f64 / 20.0).collect(),
            knot_trials: None,
            iterations: None,
            record_timings: false,
        }
    }

    /// The power-plant study: `m = 40` knots chosen by design criterion
    /// among 20000 subsets, then 15 sequential additions.
    pub fn ccpp(seed: u64) -> Self {
        Self {
            study: Study::Ccpp,
            function: TestFunction::I,
            ackley_standard: false,
            d: 4,
            n: CCPP_TRAIN_ROWS,
            sigma: 0.0,
            m: Some(40),
            methods: vec![Method::Nystrom, Method::Spgp, Method::Gprr],
            repetitions: 1,
            inner_draws: 1,
            test_size: CCPP_ROWS - CCPP_TRAIN_ROWS,
            seed,
            lambda: LambdaPolicy::auto(40, CCPP_TRAIN_ROWS),
            theta: ThetaPolicy::Estimate {
                start: DEFAULT_THETA,
                options: KernelParamOptions::default(),
            },
            sigma_grid: Vec::new(),
            knot_trials: Some(crate::designs::DEFAULT_TRIALS),
            iterations: Some(15),
            record_timings: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.repetitions == 0 || self.inner_draws == 0 {
            return Err(invalid("counts must be positive"));
        }
        if self.test_size == 0 {
            return Err(invalid("test size must be positive"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() || self.sigma_grid.iter().any(|s| !(*s >= 0.0)) {
            return Err(invalid("noise levels must be nonnegative"));
        }
        if self.methods.is_empty() {
            return Err(invalid("no methods requested"));
        }
        if self.study != Study::Ccpp {
            self.function.check_dim(self.d)?;
        }
        let allowed: &[Method] = match self.study {
            Study::Table1 => &[Method::Krr, Method::Gpr, Method::Gprr],
            Study::Table3 | Study::Ccpp => &[Method::Nystrom, Method::Spgp, Method::Eb, Method::Gprr],
            Study::Replication => &[Method::Replication],
        };
        if let Some(bad) = self.methods.iter().find(|m| !allowed.contains(m)) {
            return Err(invalid(format!("method {bad} is not part of this study")));
        }
        match (self.study, self.m) {
            (Study::Table3 | Study::Ccpp | Study::Replication, None) => {
                return Err(invalid("this study needs a knot count m"))
            }
            (_, Some(m)) if m == 0 || m > self.n => return Err(invalid("need 0 < m <= n")),
            _ => {}
        }
        if self.study == Study::Replication && !self.n.is_multiple_of(self.m.unwrap_or(1)) {
            return Err(invalid("n must be a multiple of m for a replication design"));
        }
        match &self.theta {
            ThetaPolicy::Fixed { value } if !(*value > 0.0) => Err(invalid("theta must be positive")),
            ThetaPolicy::Estimate { start, .. } if !(*start > 0.0) => Err(invalid("theta must be positive")),
            _ => Ok(()),
        }
    }

    pub(crate) fn truth(&self) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
        move |x: &[f64]| {
            if self.ackley_standard && self.function == TestFunction::II {
                ackley_standard(x)
            } else {
                functions::eval(self.function, x)
            }
        }
    }
}

/// One fit in one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub rep: usize,
    pub draw: usize,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Test MSE (integrated squared error for the replication study); absent
    /// when the fit failed.
    pub mse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variances: Option<VarianceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    /// Mean over repetitions of the per-repetition mean MSE.
    pub mmse: f64,
    /// Mean over repetitions of the per-repetition standard deviation across
    /// knot draws; absent with a single draw.
    pub mstd: Option<f64>,
    pub mean_mse: f64,
    /// Sample standard deviation over all successful runs.
    pub sd: f64,
    pub runs: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnotRecord {
    pub rep: usize,
    pub draw: usize,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialStep {
    pub m: usize,
    /// Training row added before this fit.
    pub added: Option<usize>,
    pub gcv: f64,
    pub test_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequentialTrace {
    pub steps: Vec<SequentialStep>,
    pub stopped_early: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ExperimentConfig,
    /// How hyperparameters not fixed by the config were chosen.
    pub protocol: String,
    pub per_run: Vec<RunRecord>,
    pub summary: BTreeMap<String, MethodSummary>,
    pub knots: Vec<KnotRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequential: Option<SequentialTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
    pub seed: u64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Summary key of a run: the method, plus the noise level when swept.
fn summary_key(r: &RunRecord) -> String {
    match r.sigma {
        Some(s) => format!("{}@{s}", r.method),
        None => r.method.clone(),
    }
}

/// Aggregates per-run values; repetitions are grouped by `rep`.
pub fn summarize(per_run: &[RunRecord]) -> BTreeMap<String, MethodSummary> {
    let mut groups: BTreeMap<String, BTreeMap<usize, Vec<Option<f64>>>> = BTreeMap::new();
    for r in per_run {
        groups
            .entry(summary_key(r))
            .or_default()
            .entry(r.rep)
            .or_default()
            .push(r.mse);
    }
    groups
        .into_iter()
        .map(|(key, reps)| {
            let all: Vec<f64> = reps.values().flatten().flatten().copied().collect();
            let failures = reps.values().flatten().filter(|v| v.is_none()).count();
            let per_rep: Vec<Vec<f64>> = reps
                .values()
                .map(|v| v.iter().flatten().copied().collect::<Vec<f64>>())
                .filter(|v| !v.is_empty())
                .collect();
            let multi = reps.values().any(|v| v.len() > 1);
            let rep_means: Vec<f64> = per_rep.iter().map(|v| mean(v)).collect();
            let summary = MethodSummary {
                mmse: if rep_means.is_empty() { f64::NAN } else { mean(&rep_means) },
                mstd: (multi && !per_rep.is_empty())
                    .then(|| mean(&per_rep.iter().map(|v| sample_sd(v)).collect::<Vec<_>>())),
                mean_mse: if all.is_empty() { f64::NAN } else { mean(&all) },
                sd: sample_sd(&all),
                runs: all.len(),
                failures,
            };
            (key, summary)
        })
        .collect()
}

impl BenchmarkReport {
    /// Mean MSE of `method` in each repetition, in repetition order.
    pub fn rep_means(&self, method: &str) -> Vec<Option<f64>> {
        let mut reps: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in self.per_run.iter().filter(|r| r.method == method) {
            let e = reps.entry(r.rep).or_default();
            if let Some(v) = r.mse {
                e.push(v);
            }
        }
        reps.values().map(|v| (!v.is_empty()).then(|| mean(v))).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(rep: usize, draw: usize, mse: Option<f64>) -> RunRecord {
        RunRecord {
            rep,
            draw,
            method: "gprr".into(),
            sigma: None,
            mse,
            lambda: None,
            theta: None,
            variances: None,
            error: None,
        }
    }

    #[test]
    fn summary_statistics() {
        let runs = vec![
            run(0, 0, Some(1.0)),
            run(0, 1, Some(3.0)),
            run(1, 0, Some(5.0)),
            run(1, 1, None),
            run(1, 2, Some(7.0)),
        ];
        let s = &summarize(&runs)["gprr"];
        assert_eq!(s.mmse, (2.0 + 6.0) / 2.0);
        assert_eq!(s.mstd, Some((2f64.sqrt() + 2f64.sqrt()) / 2.0));
        assert_eq!(s.mean_mse, 4.0);
        assert!((s.sd - (20.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.runs, s.failures), (4, 1));
        let single = summarize(&[run(0, 0, Some(2.0)), run(1, 0, Some(4.0))]);
        assert_eq!(single["gprr"].mstd, None);
        assert_eq!(single["gprr"].mmse, 3.0);
    }

    #[test]
    fn default_configs_validate() {
        ExperimentConfig::table1(TestFunction::I, 2, 200, 1).validate().unwrap();
        ExperimentConfig::table3(5000, 80, 1).validate().unwrap();
        ExperimentConfig::replication(49, 7, 1).validate().unwrap();
        ExperimentConfig::ccpp(1).validate().unwrap();
        let mut bad = ExperimentConfig::table1(TestFunction::F1d, 2, 200, 1);
        assert!(bad.validate().is_err());
        bad.d = 1;
        bad.methods = vec![Method::Spgp];
        assert!(bad.validate().is_err());
    }
}
