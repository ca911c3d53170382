use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::batch::select_batch_size;
use super::config::{ExperimentConfig, ModeKind, ProblemKind, Setting, SolverKind};
use crate::data::{self, load_libsvm, load_returns_csv, split_train_test, write_run_record};
use crate::error::{Error, Result};
use crate::problems::{DrpoInstance, DrpoOptions, DrsvmInstance, DrsvmOptions, Problem, SyntheticMax};
use crate::smoothing::estimate_sigma_sq;
use crate::solver::{
    iteration_limit, ssag_run, subgrad_run, tune_subgrad_step, RunOptions, RunOutcome, ScheduleState, SmoothingMode,
    StepRule, StoppingPolicy,
};

/// Environment variable capping the number of seeds run in parallel.
pub const WORKERS_ENV: &str = "SSAG_WORKERS";

const STEP_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

fn data_error(path: &Path, e: Error) -> Error {
    match e {
        Error::Io { source, .. } => Error::Data(format!("cannot read {}: {source}", path.display())),
        other => other,
    }
}

/// Builds the problem instance a config describes.
pub fn build_problem(cfg: &ExperimentConfig) -> Result<Box<dyn Problem>> {
    match cfg.problem {
        ProblemKind::Drsvm => {
            let full = match &cfg.data {
                Some(p) => load_libsvm(p, cfg.n_features).map_err(|e| data_error(p, e))?,
                None => data::synthetic::separable_2d(cfg.synthetic_n, cfg.synthetic_margin, cfg.data_seed)?,
            };
            let (train, eval) = match (&cfg.test_data, cfg.test_fraction) {
                (Some(p), _) => {
                    let t = load_libsvm(p, Some(full.n_features).max(cfg.n_features)).map_err(|e| data_error(p, e))?;
                    (full, Some(t))
                }
                (None, Some(f)) => {
                    let (a, b) = split_train_test(&full, 1.0 - f, cfg.data_seed)?;
                    (a, Some(b))
                }
                (None, None) => (full, None),
            };
            let opts = DrsvmOptions { tau: cfg.tau, eps_hat: cfg.eps_hat, kappa_hat: cfg.kappa_hat, mu_bar: mu_bar(cfg) };
            Ok(Box::new(DrsvmInstance::new(&train, opts, eval)?))
        }
        ProblemKind::Drpo => {
            let table = match &cfg.data {
                Some(p) => load_returns_csv(p, cfg.csv_header, cfg.date_column).map_err(|e| data_error(p, e))?,
                None => data::synthetic::gaussian_returns(
                    cfg.synthetic_q.unwrap_or(50),
                    cfg.synthetic_d.unwrap_or(3),
                    cfg.data_seed,
                )?,
            };
            let opts = DrpoOptions { gamma1: cfg.gamma1, gamma2: cfg.gamma2, mu_bar: mu_bar(cfg) };
            Ok(Box::new(DrpoInstance::new(&table.returns, opts)?))
        }
        ProblemKind::SyntheticMax => match cfg.synthetic_q {
            Some(q) => Ok(Box::new(SyntheticMax::random(q, cfg.synthetic_d.unwrap_or(2), cfg.data_seed)?)),
            None => Ok(Box::new(SyntheticMax::piecewise_linear_2d())),
        },
    }
}

fn mu_bar(cfg: &ExperimentConfig) -> f64 {
    match cfg.mu_fixed {
        Setting::Value(mu) if cfg.mode == ModeKind::Fixed => mu.max(cfg.mu0),
        _ => cfg.mu0,
    }
}

/// `count` feasible points: the start point plus standard normal noise,
/// projected back onto the feasible set.
pub fn random_feasible_points(problem: &dyn Problem, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = problem.initial_point();
    (0..count)
        .map(|_| {
            let v: Vec<f64> = x0.iter().map(|x| x + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
            problem.feasible_set().project(&v)
        })
        .collect()
}

/// Smoothing schedule mode from the config, with `mu_fixed = auto`
/// resolved to `epsilon / (4 kappa)`.
pub fn smoothing_mode(cfg: &ExperimentConfig, kappa: f64) -> Result<SmoothingMode> {
    Ok(match cfg.mode {
        ModeKind::Diminishing => SmoothingMode::Diminishing,
        ModeKind::Fixed => match cfg.mu_fixed {
            Setting::Value(mu) => SmoothingMode::Fixed(mu),
            _ if kappa > 0.0 => SmoothingMode::Fixed(cfg.epsilon / (4.0 * kappa)),
            _ => return Err(Error::Config("`mu_fixed = auto` needs kappa > 0".into())),
        },
    })
}

/// Variance estimate at the smoothing level the run starts from.
pub fn resolve_sigma_sq(cfg: &ExperimentConfig, problem: &dyn Problem) -> Result<f64> {
    if let Setting::Value(s) = cfg.sigma_sq {
        return Ok(s);
    }
    let kappa = problem.params().kappa;
    let mu = match smoothing_mode(cfg, kappa)? {
        SmoothingMode::Diminishing => cfg.mu0,
        SmoothingMode::Fixed(mu) => mu,
    };
    let draws = match cfg.sigma_draws {
        Setting::Value(d) => d,
        _ => problem.sample_count().div_ceil(100).max(2),
    };
    let points = random_feasible_points(problem, cfg.sigma_points, cfg.data_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.data_seed.wrapping_add(1));
    estimate_sigma_sq(problem, &points, mu, draws, &mut rng)
}

/// Runs the batch-size pilots described by the config.
pub fn resolve_batch_size(cfg: &ExperimentConfig, problem: &dyn Problem) -> Result<usize> {
    if let Setting::Value(m) = cfg.batch_size {
        return Ok(m);
    }
    let mode = smoothing_mode(cfg, problem.params().kappa)?;
    let pilot = if cfg.deterministic {
        StoppingPolicy { max_sfo: Some(cfg.pilot_sfo), ..Default::default() }
    } else {
        StoppingPolicy { max_time: Some(Duration::from_secs_f64(cfg.pilot_time)), ..Default::default() }
    };
    select_batch_size(problem, cfg.mu0, mode, &cfg.batch_candidates, &pilot, cfg.pilots_per_candidate, cfg.data_seed)
}

/// Everything `auto` in a config, resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub kappa: f64,
    pub sigma_sq: f64,
    pub batch_size: usize,
    pub iteration_limit: u64,
    pub mode: SmoothingMode,
    pub reference: Option<f64>,
    pub subgrad_step: Option<f64>,
}

impl Resolved {
    pub fn stopping(&self) -> StoppingPolicy {
        let c = &self.config;
        let value = |s: Setting<u64>| if let Setting::Value(v) = s { Some(v) } else { None };
        StoppingPolicy {
            max_sfo: value(c.max_sfo),
            max_time: if c.deterministic { None } else { c.max_time.map(Duration::from_secs_f64) },
            max_iters: value(c.max_iters),
            epsilon_gap: c.stop_on_gap.then_some(c.epsilon),
            reference: self.reference,
        }
    }

    pub fn label(&self) -> String {
        format!("{}_{}", self.config.problem.as_str(), self.config.solver.as_str())
    }

    pub fn mu_policy(&self) -> String {
        match self.mode {
            SmoothingMode::Diminishing => format!("diminishing(mu0={})", self.config.mu0),
            SmoothingMode::Fixed(mu) => format!("fixed(mu={mu})"),
        }
    }
}

pub fn resolve(cfg: &ExperimentConfig, problem: &dyn Problem) -> Result<Resolved> {
    cfg.validate()?;
    let kappa = problem.params().kappa;
    let mode = smoothing_mode(cfg, kappa)?;
    let sigma_sq = resolve_sigma_sq(cfg, problem)?;
    let batch_size = resolve_batch_size(cfg, problem)?;
    let n = iteration_limit(cfg.epsilon, kappa, cfg.mu0, sigma_sq.sqrt(), batch_size)?;
    let mut c = cfg.clone();
    c.sigma_sq = Setting::Value(sigma_sq);
    c.batch_size = Setting::Value(batch_size);
    if let SmoothingMode::Fixed(mu) = mode {
        c.mu_fixed = Setting::Value(mu);
    }
    if c.max_sfo == Setting::Auto {
        c.max_sfo = Setting::Value(batch_size as u64 * n);
    }
    if c.max_iters == Setting::Auto {
        c.max_iters = Setting::Value(n);
    }
    let sub_m = c.subgrad_batch.unwrap_or(batch_size);
    let subgrad_step = if c.solver == SolverKind::Subgrad || c.reference == Setting::Auto {
        let step = match c.subgrad_step {
            Setting::Value(s) => s,
            _ => tune_subgrad_step(problem, &STEP_GRID, sub_m, &StoppingPolicy::iterations(500), c.data_seed)?,
        };
        c.subgrad_step = Setting::Value(step);
        Some(step)
    } else {
        None
    };
    let reference = match c.reference {
        Setting::Value(r) => Some(r),
        Setting::None => None,
        Setting::Auto => {
            let r = reference_value(problem, subgrad_step.expect("step resolved"), sub_m, c.reference_iters, &c.out, c.data_seed)?;
            c.reference = Setting::Value(r);
            Some(r)
        }
    };
    if let Setting::Auto = c.log_every {
        let horizon = match (c.max_iters, c.max_sfo) {
            (Setting::Value(n), _) => n,
            (_, Setting::Value(s)) => s / batch_size as u64,
            _ => n,
        };
        c.log_every = Setting::Value((horizon / 200).max(1));
    }
    Ok(Resolved { config: c, kappa, sigma_sq, batch_size, iteration_limit: n, mode, reference, subgrad_step })
}

/// Best objective of a long baseline run, cached in
/// `<out>/reference_cache.csv` by problem fingerprint.
pub fn reference_value(problem: &dyn Problem, step: f64, m: usize, iters: u64, out: &Path, seed: u64) -> Result<f64> {
    let cache = out.join("reference_cache.csv");
    let key = format!("{}-{step:?}-{m}-{iters}-{seed}", problem.fingerprint());
    if let Ok(text) = fs::read_to_string(&cache) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once(',') {
                if k == key {
                    if let Ok(v) = v.parse::<f64>() {
                        return Ok(v);
                    }
                }
            }
        }
    }
    let opts = RunOptions { log_every: Some((iters / 100).max(1)), ..Default::default() };
    let run = subgrad_run(problem, StepRule::InvSqrtK(step), m, &StoppingPolicy::iterations(iters), &opts, seed)?;
    let value = run.record.last().map_or(f64::NAN, |r| r.objective);
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut f = fs::OpenOptions::new().create(true).append(true).open(&cache).map_err(|e| Error::io(&cache, e))?;
    writeln!(f, "{key},{value:?}").map_err(|e| Error::io(&cache, e))?;
    Ok(value)
}

/// Runs one seed of the resolved experiment.
pub fn run_seed(problem: &dyn Problem, r: &Resolved, seed: u64) -> Result<RunOutcome> {
    let c = &r.config;
    let opts = RunOptions {
        start: None,
        log_every: if let Setting::Value(l) = c.log_every { Some(l) } else { None },
        record_timing: !c.deterministic,
        label: r.label(),
        feasibility_tol: None,
    };
    let stopping = r.stopping();
    match c.solver {
        SolverKind::Ssag => {
            let sched = ScheduleState::new(c.mu0, r.batch_size, r.mode, problem.params())?;
            ssag_run(problem, sched, &stopping, &opts, seed)
        }
        SolverKind::Subgrad => {
            let step = r.subgrad_step.expect("step resolved for the baseline");
            subgrad_run(problem, StepRule::InvSqrtK(step), c.subgrad_batch.unwrap_or(r.batch_size), &stopping, &opts, seed)
        }
    }
}

/// One row per (solver, epsilon): statistics over completed seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub solver: String,
    pub epsilon: f64,
    pub seeds: usize,
    pub failed: usize,
    pub obj_mean: f64,
    pub obj_var: Option<f64>,
    pub acc_mean: Option<f64>,
    pub acc_var: Option<f64>,
    pub cpu_mean: Option<f64>,
    pub sfo_budget: Option<u64>,
    pub batch_size: usize,
    pub mu_policy: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

pub const SUMMARY_HEADER: &str =
    "problem,solver,epsilon,seeds,failed,obj_mean,obj_var,acc_mean,acc_var,cpu_mean,sfo_budget,batch_size,mu_policy";

fn mean_var(v: &[f64]) -> (f64, Option<f64>) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = (v.len() > 1).then(|| v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0));
    (mean, var)
}

impl SummaryRow {
    /// Statistics of the final logged row of each record.
    pub fn from_records(records: &[crate::solver::RunRecord], failed: usize, r: &Resolved) -> Result<Self> {
        let finals: Vec<_> = records.iter().filter_map(|rec| rec.last()).collect();
        if finals.is_empty() {
            return Err(Error::Numeric("no completed runs to summarize".into()));
        }
        let objs: Vec<f64> = finals.iter().map(|f| f.objective).collect();
        let (obj_mean, obj_var) = mean_var(&objs);
        let accs: Option<Vec<f64>> = finals.iter().map(|f| f.accuracy).collect();
        let (acc_mean, acc_var) = match accs {
            Some(a) => {
                let (m, v) = mean_var(&a);
                (Some(m), v)
            }
            None => (None, None),
        };
        let cpus: Option<Vec<f64>> = finals.iter().map(|f| f.cpu_seconds).collect();
        let c = &r.config;
        Ok(SummaryRow {
            problem: c.problem.as_str().into(),
            solver: c.solver.as_str().into(),
            epsilon: c.epsilon,
            seeds: finals.len(),
            failed,
            obj_mean,
            obj_var,
            acc_mean,
            acc_var,
            cpu_mean: cpus.map(|v| mean_var(&v).0),
            sfo_budget: if let Setting::Value(s) = c.max_sfo { Some(s) } else { None },
            batch_size: r.batch_size,
            mu_policy: r.mu_policy(),
        })
    }
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        let mut s = format!("{SUMMARY_HEADER}\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{:?},{},{},{:?},{},{},{},{},{},{},{}\n",
                r.problem,
                r.solver,
                r.epsilon,
                r.seeds,
                r.failed,
                r.obj_mean,
                f(r.obj_var),
                f(r.acc_mean),
                f(r.acc_var),
                f(r.cpu_mean),
                r.sfo_budget.map(|v| v.to_string()).unwrap_or_default(),
                r.batch_size,
                r.mu_policy
            ));
        }
        s
    }
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub resolved: Resolved,
    pub summary: SummaryTable,
    pub record_paths: Vec<PathBuf>,
    /// `(seed, error message)` for runs that failed.
    pub failures: Vec<(u64, String)>,
}

fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Resolves the config, runs every seed, and writes
///
/// - `records/<label>_seed<seed>.csv` per completed seed,
/// - `summary.csv`,
/// - `resolved.cfg` (the config with `auto` values filled in),
/// - `timings.csv` (seed, CPU seconds, stop reason),
/// - `FAILED` listing failed seeds, when any failed.
///
/// Returns an error after writing partial outputs if any seed failed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let problem = build_problem(cfg)?;
    let resolved = resolve(cfg, problem.as_ref())?;
    let out = &resolved.config.out;
    let rec_dir = out.join("records");
    fs::create_dir_all(&rec_dir).map_err(|e| Error::io(&rec_dir, e))?;
    write_file(&out.join("resolved.cfg"), &resolved.config.to_text())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(u64, Result<RunOutcome>)> = pool.install(|| {
        resolved
            .config
            .seeds
            .par_iter()
            .map(|&s| (s, run_seed(problem.as_ref(), &resolved, s)))
            .collect()
    });

    let mut records = Vec::new();
    let mut record_paths = Vec::new();
    let mut failures = Vec::new();
    let mut timings = String::from("seed,cpu_seconds,iterations,sfo_calls,stop\n");
    for (seed, res) in results {
        match res {
            Ok(o) => {
                let path = rec_dir.join(o.record.file_name());
                write_run_record(&o.record, &path)?;
                timings.push_str(&format!(
                    "{seed},{:?},{},{},{:?}\n",
                    o.elapsed.as_secs_f64(),
                    o.iterations,
                    o.sfo_calls,
                    o.stop
                ));
                record_paths.push(path);
                records.push(o.record);
            }
            Err(e) => failures.push((seed, e.to_string())),
        }
    }
    write_file(&out.join("timings.csv"), &timings)?;
    let failed_marker = out.join("FAILED");
    if failures.is_empty() {
        if failed_marker.exists() {
            fs::remove_file(&failed_marker).map_err(|e| Error::io(&failed_marker, e))?;
        }
    } else {
        let text: String = failures.iter().map(|(s, e)| format!("seed {s}: {e}\n")).collect();
        write_file(&failed_marker, &text)?;
    }
    let summary = if records.is_empty() {
        SummaryTable::default()
    } else {
        SummaryTable { rows: vec![SummaryRow::from_records(&records, failures.len(), &resolved)?] }
    };
    write_file(&out.join("summary.csv"), &summary.to_csv())?;
    if !failures.is_empty() {
        return Err(Error::Numeric(format!(
            "{} of {} seeds failed (see {}); first: seed {}: {}",
            failures.len(),
            resolved.config.seeds.len(),
            failed_marker.display(),
            failures[0].0,
            failures[0].1
        )));
    }
    Ok(ExperimentReport { resolved, summary, record_paths, failures })
}
