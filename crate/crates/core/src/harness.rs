//! Experiment orchestration: TOML configs, seeded multi-trial runs, aggregation
//! across trials and CSV/JSON output.
//!
//! Config schema (every section but `[problem]` is optional):
//!
//! ```toml
//! trials = 100                      # default 100
//! output_dir = "results"            # default "results"
//! algorithms = ["lrrl-altgdmin", "lrrl-altgd", "mom", "thompson"]
//! dataset = "synthetic"             # or [dataset.mnist] images = "..." labels = "..."
//!
//! [problem]
//! d = 20
//! tasks = 30
//! rank = 2
//! arms = 5
//! horizon = 40
//! noise_variance = 1e-6             # default 1e-6
//! seed = 0                          # master seed, default 0
//!
//! [gd]                              # see `GdConfig`
//! iterations = 100
//! c_gamma = 0.4
//! sample_split = true
//!
//! [schedule]
//! mode = "uniform"                  # or "doubling"; default uniform
//! epochs = 4                        # uniform only; default 4
//!
//! [sweep]                           # cartesian product over the lists
//! tasks = [10, 25, 50, 75, 100]
//! rank = [2]
//!
//! [thompson]
//! prior_variance = 1.0
//! ridge = 1.0
//!
//! [altgd]
//! w_step = 0.5
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandit::{
    self, Agent, AltGdAgent, AltGdMinAgent, BanditError, EpochSchedule, ExperimentTrace, MomAgent, ScheduleMode,
    SimOptions, ThompsonAgent, ThompsonConfig,
};
use crate::environment::{
    self, load_mnist_idx, BanditEnv, EnvError, IdxError, MnistEnv, MnistTaskWorld, ProblemConfig, SyntheticEnv,
    MNIST_PIXELS,
};
use crate::estimators::GdConfig;
use crate::rng::{Purpose, TrialSeed};

/// Fraction of failed trials above which a run is reported as failed.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading MNIST: {0}")]
    Mnist(#[from] IdxError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("nothing to write for {kind} output")]
    EmptyResult { kind: &'static str },
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("{failed} of {trials} trials failed (limit {limit:.0}%)")]
    TooManyFailures { failed: usize, trials: usize, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "lrrl-altgdmin")]
    LrrlAltGdMin,
    #[serde(rename = "lrrl-altgd")]
    LrrlAltGd,
    #[serde(rename = "mom")]
    Mom,
    #[serde(rename = "thompson")]
    Thompson,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::LrrlAltGdMin => "lrrl-altgdmin",
            Self::LrrlAltGd => "lrrl-altgd",
            Self::Mom => "mom",
            Self::Thompson => "thompson",
        }
    }
}

fn default_epochs() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "default_mode")]
    pub mode: ScheduleMode,
    /// Number of epochs of the uniform schedule.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
}

fn default_mode() -> ScheduleMode {
    ScheduleMode::Uniform
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            mode: default_mode(),
            epochs: default_epochs(),
        }
    }
}

impl ScheduleConfig {
    pub fn build(&self, horizon: usize) -> bandit::Result<EpochSchedule> {
        bandit::epoch_schedule(horizon, self.mode, Some(self.epochs))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetConfig {
    #[default]
    Synthetic,
    Mnist { images: PathBuf, labels: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tasks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<Vec<usize>>,
}

fn default_w_step() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltGdOptions {
    /// Step on the per-sample-normalized W gradient.
    #[serde(default = "default_w_step")]
    pub w_step: f64,
}

impl Default for AltGdOptions {
    fn default() -> Self {
        Self { w_step: default_w_step() }
    }
}

fn default_trials() -> usize {
    100
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::LrrlAltGdMin]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub dataset: DatasetConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub gd: GdConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub thompson: ThompsonConfig,
    #[serde(default)]
    pub altgd: AltGdOptions,
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl ExperimentConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `(T, r)` pairs to run, tasks-major.
    pub fn sweep_points(&self) -> Vec<(usize, usize)> {
        let sweep = self.sweep.clone().unwrap_or_default();
        let tasks = sweep.tasks.unwrap_or_else(|| vec![self.problem.tasks]);
        let ranks = sweep.rank.unwrap_or_else(|| vec![self.problem.rank]);
        tasks.iter().flat_map(|&t| ranks.iter().map(move |&r| (t, r))).collect()
    }

    /// Problem for one sweep point.
    pub fn problem_at(&self, tasks: usize, rank: usize) -> ProblemConfig {
        let mut p = self.problem.clone();
        p.tasks = tasks;
        p.rank = rank;
        p
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("algorithms", "must list at least one algorithm"));
        }
        let unique: BTreeSet<_> = self.algorithms.iter().collect();
        if unique.len() != self.algorithms.len() {
            return Err(invalid("algorithms", "contains duplicates"));
        }
        if let Some(sweep) = &self.sweep {
            for (name, list) in [("sweep.tasks", &sweep.tasks), ("sweep.rank", &sweep.rank)] {
                if list.as_ref().is_some_and(Vec::is_empty) {
                    return Err(invalid(name, "must not be empty"));
                }
            }
        }
        self.gd.validate().map_err(|(f, reason)| invalid(format!("gd.{f}"), reason))?;
        if !(self.thompson.prior_variance > 0.0 && self.thompson.ridge > 0.0) {
            return Err(invalid("thompson", "prior_variance and ridge must be > 0"));
        }
        if !(self.altgd.w_step > 0.0 && self.altgd.w_step.is_finite()) {
            return Err(invalid("altgd.w_step", "must be positive and finite"));
        }
        let schedule = self
            .schedule
            .build(self.problem.horizon)
            .map_err(|e| invalid("schedule", e.to_string()))?;

        let sweep_field = |swept: bool, name: &str| {
            if swept {
                format!("sweep.{name}")
            } else {
                format!("problem.{name}")
            }
        };
        let swept_tasks = self.sweep.as_ref().is_some_and(|s| s.tasks.is_some());
        let swept_rank = self.sweep.as_ref().is_some_and(|s| s.rank.is_some());
        for (tasks, rank) in self.sweep_points() {
            let p = self.problem_at(tasks, rank);
            p.validate().map_err(|e| match e {
                EnvError::InvalidConfig { field, reason } => {
                    let field = match field {
                        "tasks" => sweep_field(swept_tasks, "tasks"),
                        "rank" => sweep_field(swept_rank, "rank"),
                        other => format!("problem.{other}"),
                    };
                    invalid(field, reason)
                }
                other => invalid("problem", other.to_string()),
            })?;
            if let DatasetConfig::Mnist { .. } = self.dataset {
                if p.tasks > 45 {
                    return Err(invalid(sweep_field(swept_tasks, "tasks"), "MNIST has at most 45 digit-pair tasks"));
                }
            }
            if self.gd.sample_split && self.algorithms.contains(&Algorithm::LrrlAltGdMin) {
                check_split_feasible(&schedule, self.gd.iterations, rank)?;
            }
        }
        if let DatasetConfig::Mnist { .. } = self.dataset {
            if self.problem.d != MNIST_PIXELS {
                return Err(invalid("problem.d", format!("MNIST features have d = {MNIST_PIXELS}")));
            }
            if self.problem.arms != 2 {
                return Err(invalid("problem.arms", "MNIST rounds have exactly 2 arms"));
            }
            if self.problem.arm_mean.is_some() {
                return Err(invalid("problem.arm_mean", "not used with MNIST"));
            }
        }
        Ok(())
    }
}

/// With splitting, epoch 1 is cut into `2L + 1` parts and later epochs into
/// `2L`; every W-update part needs at least `r` rows per task.
fn check_split_feasible(schedule: &EpochSchedule, iterations: usize, rank: usize) -> Result<(), ConfigError> {
    for m in 1..=schedule.epochs() {
        let len = schedule.window(m).len();
        let parts = 2 * iterations + usize::from(m == 1);
        if len / parts < rank {
            return Err(invalid(
                "gd.sample_split",
                format!(
                    "epoch {m} has {len} rounds per task, too few for {parts} parts of >= {rank} rows; \
                     lower gd.iterations or disable sample_split"
                ),
            ));
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text)
}

/// Two-pass mean and sample variance (`n - 1` denominator; 0 for one value).
pub fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1) as f64)
}

/// Mean and variance per index of a family of equally-indexed series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: Vec<usize>,
}

impl SeriesStats {
    fn from_columns(columns: Vec<Vec<f64>>) -> Self {
        let mut mean = Vec::with_capacity(columns.len());
        let mut var = Vec::with_capacity(columns.len());
        let mut count = Vec::with_capacity(columns.len());
        for col in columns {
            let (m, v) = mean_and_variance(&col);
            mean.push(m);
            var.push(v);
            count.push(col.len());
        }
        Self { mean, var, count }
    }
}

/// Collects `series[i][k]` (when present) into one column per `k`.
fn columns<'a>(series: impl Iterator<Item = Vec<Option<f64>>> + 'a) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for s in series {
        if cols.len() < s.len() {
            cols.resize(s.len(), Vec::new());
        }
        for (k, v) in s.into_iter().enumerate() {
            if let Some(v) = v {
                cols[k].push(v);
            }
        }
    }
    cols
}

/// GD diagnostics of one `(epoch, iteration)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GdCell {
    pub epoch: usize,
    pub gd_iter: usize,
    pub mean_se: f64,
    pub mean_err_theta: f64,
    pub var_err_theta: f64,
    pub count: usize,
}

/// Aggregates for one `(algorithm, T, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub algorithm: Algorithm,
    pub tasks: usize,
    pub rank: usize,
    pub trials: usize,
    /// Indexed by round (0-based; round `n + 1` in the CSV).
    pub regret: SeriesStats,
    /// Indexed by epoch, 0 = initialization.
    pub err_theta: SeriesStats,
    pub se_iter: Vec<GdCell>,
}

impl PointResult {
    pub fn final_regret(&self) -> (f64, f64) {
        match (self.regret.mean.last(), self.regret.var.last()) {
            (Some(&m), Some(&v)) => (m, v),
            _ => (f64::NAN, f64::NAN),
        }
    }
}

/// A trial that errored, with enough to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub tasks: usize,
    pub rank: usize,
    pub trial: u64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub seed: u64,
    pub trials: usize,
    pub points: Vec<PointResult>,
    pub failures: Vec<TrialFailure>,
    /// Estimation failures absorbed inside otherwise successful trials.
    pub estimation_failures: usize,
}

impl AggregateResult {
    pub fn point(&self, algorithm: Algorithm, tasks: usize, rank: usize) -> Option<&PointResult> {
        self.points
            .iter()
            .find(|p| p.algorithm == algorithm && p.tasks == tasks && p.rank == rank)
    }
}

/// Input shared by every trial of one sweep point.
enum World {
    Synthetic,
    Mnist(Arc<MnistTaskWorld>),
}

/// Synthetic environment of one trial; the planted instance comes from the
/// trial's ground-truth stream.
pub fn synthetic_env(problem: &ProblemConfig, seed: TrialSeed) -> Result<SyntheticEnv, EnvError> {
    SyntheticEnv::generate(problem.clone(), &mut seed.global(Purpose::GroundTruth))
}

fn build_env(problem: &ProblemConfig, world: &World, seed: TrialSeed) -> Result<Box<dyn BanditEnv>, EnvError> {
    Ok(match world {
        World::Synthetic => Box::new(synthetic_env(problem, seed)?),
        World::Mnist(w) => Box::new(MnistEnv::new(Arc::clone(w), problem.tasks, problem.noise_variance)?),
    })
}

fn make_agent(
    algorithm: Algorithm,
    cfg: &ExperimentConfig,
    env: &dyn BanditEnv,
    rank: usize,
    seed: TrialSeed,
) -> bandit::Result<Box<dyn Agent>> {
    Ok(match algorithm {
        Algorithm::LrrlAltGdMin => Box::new(AltGdMinAgent::new(rank, cfg.gd.clone(), seed)),
        Algorithm::LrrlAltGd => Box::new(AltGdAgent::new(rank, cfg.gd.clone(), cfg.altgd.w_step, seed)),
        Algorithm::Mom => Box::new(MomAgent::new(rank, cfg.gd.svd_iters, seed)),
        Algorithm::Thompson => Box::new(ThompsonAgent::new(env.dim(), env.tasks(), cfg.thompson, seed)?),
    })
}

/// Every configured algorithm on one trial; all share the trial's streams.
pub fn run_trial(
    cfg: &ExperimentConfig,
    problem: &ProblemConfig,
    schedule: &EpochSchedule,
    env: &dyn BanditEnv,
    seed: TrialSeed,
) -> bandit::Result<Vec<ExperimentTrace>> {
    cfg.algorithms
        .iter()
        .map(|&alg| {
            let mut agent = make_agent(alg, cfg, env, problem.rank, seed)?;
            bandit::simulate(env, schedule, agent.as_mut(), seed, SimOptions::default())
        })
        .collect()
}

/// Mean and variance across `traces` (one per trial) of one `(algorithm, T, r)`.
pub fn aggregate_traces(algorithm: Algorithm, tasks: usize, rank: usize, traces: &[&ExperimentTrace]) -> PointResult {
    let regret = SeriesStats::from_columns(columns(
        traces.iter().map(|t| t.cumulative_regret.iter().map(|&v| Some(v)).collect()),
    ));
    let err_theta = SeriesStats::from_columns(columns(traces.iter().map(|t| t.err_theta.clone())));
    let mut se_iter = Vec::new();
    let epochs = traces.iter().map(|t| t.gd_trace.len()).max().unwrap_or(0);
    for e in 0..epochs {
        let se = columns(traces.iter().map(|t| {
            t.gd_trace.get(e).map(|it| it.iter().map(|d| d.se).collect()).unwrap_or_default()
        }));
        let err = columns(traces.iter().map(|t| {
            t.gd_trace
                .get(e)
                .map(|it| it.iter().map(|d| d.err_theta).collect())
                .unwrap_or_default()
        }));
        for (i, (se_col, err_col)) in se.iter().zip(&err).enumerate() {
            if se_col.is_empty() && err_col.is_empty() {
                continue;
            }
            let (mean_se, _) = mean_and_variance(se_col);
            let (mean_err_theta, var_err_theta) = mean_and_variance(err_col);
            se_iter.push(GdCell {
                epoch: e + 1,
                gd_iter: i + 1,
                mean_se,
                mean_err_theta,
                var_err_theta,
                count: err_col.len(),
            });
        }
    }
    PointResult {
        algorithm,
        tasks,
        rank,
        trials: traces.len(),
        regret,
        err_theta,
        se_iter,
    }
}

/// Runs every sweep point, algorithm and trial, and aggregates in trial order.
///
/// Trials run on the current rayon pool. Output files are not written here.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult, HarnessError> {
    cfg.validate()?;
    let world = match &cfg.dataset {
        DatasetConfig::Synthetic => World::Synthetic,
        DatasetConfig::Mnist { images, labels } => World::Mnist(Arc::new(load_mnist_idx(images, labels)?)),
    };
    let schedule = cfg.schedule.build(cfg.problem.horizon)?;
    let mut points = Vec::new();
    let mut failures = Vec::new();
    let mut estimation_failures = 0;

    for (tasks, rank) in cfg.sweep_points() {
        let problem = cfg.problem_at(tasks, rank);
        log::info!("running T={tasks} r={rank}: {} trials", cfg.trials);
        let outcomes: Vec<std::result::Result<Vec<ExperimentTrace>, String>> = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|trial| {
                let seed = TrialSeed::new(problem.seed, trial);
                let env = build_env(&problem, &world, seed).map_err(|e| e.to_string())?;
                run_trial(cfg, &problem, &schedule, env.as_ref(), seed).map_err(|e| e.to_string())
            })
            .collect();

        let mut ok: Vec<Vec<ExperimentTrace>> = Vec::with_capacity(outcomes.len());
        for (trial, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(traces) => {
                    estimation_failures += traces.iter().map(|t| t.failures.len()).sum::<usize>();
                    ok.push(traces);
                }
                Err(message) => {
                    log::warn!("T={tasks} r={rank} trial {trial} (seed {}) failed: {message}", problem.seed);
                    failures.push(TrialFailure {
                        tasks,
                        rank,
                        trial: trial as u64,
                        seed: problem.seed,
                        message,
                    });
                }
            }
        }
        for (a, &alg) in cfg.algorithms.iter().enumerate() {
            let traces: Vec<&ExperimentTrace> = ok.iter().map(|t| &t[a]).collect();
            points.push(aggregate_traces(alg, tasks, rank, &traces));
        }
    }
    Ok(AggregateResult {
        seed: cfg.problem.seed,
        trials: cfg.trials,
        points,
        failures,
        estimation_failures,
    })
}

/// Errors when more than [`MAX_FAILURE_FRACTION`] of the trials failed.
pub fn check_failures(result: &AggregateResult, sweep_points: usize) -> Result<(), HarnessError> {
    let total = result.trials * sweep_points.max(1);
    let failed = result.failures.len();
    if failed as f64 > MAX_FAILURE_FRACTION * total as f64 {
        return Err(HarnessError::TooManyFailures {
            failed,
            trials: total,
            limit: MAX_FAILURE_FRACTION * 100.0,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Regret,
    ErrTheta,
    SeIter,
}

impl CsvKind {
    pub const ALL: [CsvKind; 3] = [CsvKind::Regret, CsvKind::ErrTheta, CsvKind::SeIter];

    pub fn name(self) -> &'static str {
        match self {
            Self::Regret => "regret",
            Self::ErrTheta => "err_theta",
            Self::SeIter => "se_iter",
        }
    }

    pub fn header(self) -> &'static str {
        match self {
            Self::Regret => "algorithm,T,r,round,mean_cum_regret,var",
            Self::ErrTheta => "algorithm,T,r,epoch,mean_err,var",
            Self::SeIter => "algorithm,T,r,epoch,gd_iter,mean_se,mean_err_theta,var_err_theta",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name())
    }
}

/// Scientific notation with 6 significant digits and an exponent of at least
/// two digits, e.g. `1.00000e-06`.
pub fn format_sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Version string recorded in CSV headers.
pub fn git_describe() -> &'static str {
    option_env!("LRRL_GIT_DESCRIBE").unwrap_or(concat!("v", env!("CARGO_PKG_VERSION")))
}

/// Renders one CSV kind; `None` when the result has no rows for it.
pub fn render_csv(result: &AggregateResult, kind: CsvKind) -> Option<String> {
    let mut body = String::new();
    for p in &result.points {
        let key = format!("{},{},{}", p.algorithm.name(), p.tasks, p.rank);
        match kind {
            CsvKind::Regret => {
                for (n, (m, v)) in p.regret.mean.iter().zip(&p.regret.var).enumerate() {
                    if p.regret.count[n] > 0 {
                        let _ = writeln!(body, "{key},{},{},{}", n + 1, format_sci(*m), format_sci(*v));
                    }
                }
            }
            CsvKind::ErrTheta => {
                for (e, (m, v)) in p.err_theta.mean.iter().zip(&p.err_theta.var).enumerate() {
                    if p.err_theta.count[e] > 0 {
                        let _ = writeln!(body, "{key},{e},{},{}", format_sci(*m), format_sci(*v));
                    }
                }
            }
            CsvKind::SeIter => {
                for c in &p.se_iter {
                    let _ = writeln!(
                        body,
                        "{key},{},{},{},{},{}",
                        c.epoch,
                        c.gd_iter,
                        format_sci(c.mean_se),
                        format_sci(c.mean_err_theta),
                        format_sci(c.var_err_theta)
                    );
                }
            }
        }
    }
    if body.is_empty() {
        return None;
    }
    Some(format!(
        "# seed={}\n# git-describe={}\n{}\n{body}",
        result.seed,
        git_describe(),
        kind.header()
    ))
}

pub fn write_csv(result: &AggregateResult, kind: CsvKind, path: &Path) -> Result<(), HarnessError> {
    let text = render_csv(result, kind).ok_or(HarnessError::EmptyResult { kind: kind.name() })?;
    fs::write(path, text).map_err(|source| HarnessError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    git_describe: &'a str,
    points: Vec<PointSummary>,
    failures: &'a [TrialFailure],
    estimation_failures: usize,
}

#[derive(Debug, Serialize)]
struct PointSummary {
    algorithm: Algorithm,
    tasks: usize,
    rank: usize,
    trials: usize,
    final_cum_regret: f64,
    final_cum_regret_var: f64,
    per_task_regret: f64,
    final_err_theta: Option<f64>,
}

pub fn summary_json(cfg: &ExperimentConfig, result: &AggregateResult) -> String {
    let points = result
        .points
        .iter()
        .map(|p| {
            let (m, v) = p.final_regret();
            PointSummary {
                algorithm: p.algorithm,
                tasks: p.tasks,
                rank: p.rank,
                trials: p.trials,
                final_cum_regret: m,
                final_cum_regret_var: v,
                per_task_regret: m / p.tasks as f64,
                final_err_theta: p
                    .err_theta
                    .mean
                    .last()
                    .copied()
                    .filter(|_| p.err_theta.count.last().is_some_and(|&c| c > 0)),
            }
        })
        .collect();
    let s = Summary {
        config: cfg,
        git_describe: git_describe(),
        points,
        failures: &result.failures,
        estimation_failures: result.estimation_failures,
    };
    serde_json::to_string_pretty(&s).expect("summary serializes") + "\n"
}

/// Writes every non-empty CSV kind plus `summary.json` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, result: &AggregateResult, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|source| HarnessError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for kind in CsvKind::ALL {
        let path = dir.join(kind.file_name());
        match write_csv(result, kind, &path) {
            Ok(()) => written.push(path),
            Err(HarnessError::EmptyResult { kind }) => log::info!("no {kind} rows; skipping"),
            Err(e) => return Err(e),
        }
    }
    let path = dir.join("summary.json");
    fs::write(&path, summary_json(cfg, result)).map_err(|source| HarnessError::Write {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(written)
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Parses, runs and writes; the one-call pipeline behind `lrrl run`.
pub fn run_pipeline(cfg: &ExperimentConfig, output_dir: &Path, workers: usize) -> Result<(AggregateResult, Vec<PathBuf>), HarnessError> {
    let result = with_workers(workers, || run_experiment(cfg))??;
    let written = write_outputs(cfg, &result, output_dir)?;
    check_failures(&result, cfg.sweep_points().len())?;
    Ok((result, written))
}

/// Summary of an MNIST IDX pair for `lrrl mnist-check`.
pub fn mnist_summary(images: &Path, labels: &Path) -> Result<String, IdxError> {
    let world = environment::load_mnist_idx(images, labels)?;
    let mut out = format!("images: {}\n", world.total_images());
    for digit in 0..10u8 {
        let _ = writeln!(out, "digit {digit}: {}", world.pool_size(digit));
    }
    let usable = world
        .task_pairs()
        .iter()
        .filter(|&&(i, j)| world.pool_size(i) > 0 && world.pool_size(j) > 0)
        .count();
    let _ = writeln!(out, "usable digit-pair tasks: {usable} of {}", world.task_pairs().len());
    Ok(out)
}
