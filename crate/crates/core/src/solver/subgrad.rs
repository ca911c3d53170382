//! Projected stochastic subgradient baseline:
//! `x_{k+1} = P_X(x_k - gamma_k g_k)` with a mini-batch subgradient `g_k`.

use cpu_time::ThreadTime;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ssag::{check_feasible, checked_start, gap_hit, Logger};
use super::{RunOptions, RunOutcome, StoppingPolicy};
use crate::error::{Error, Result};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `gamma_k = c / sqrt(k)`.
    InvSqrtK(f64),
    /// `gamma_k = c`.
    FixedStep(f64),
}

impl StepRule {
    pub fn step(&self, k: u64) -> f64 {
        match *self {
            StepRule::InvSqrtK(c) => c / (k as f64).sqrt(),
            StepRule::FixedStep(c) => c,
        }
    }

    fn validate(&self) -> Result<()> {
        let (StepRule::InvSqrtK(c) | StepRule::FixedStep(c)) = *self;
        if c > 0.0 && c.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!("step constant must be positive, got {c}")))
        }
    }
}

/// Runs the baseline. The reported iterate (and each logged objective) is
/// the best one seen at a logged iteration, so the logged objective never
/// increases. SFO calls are charged as the problem reports them.
pub fn subgrad_run(
    problem: &dyn Problem,
    rule: StepRule,
    m: usize,
    stopping: &StoppingPolicy,
    options: &RunOptions,
    seed: u64,
) -> Result<RunOutcome> {
    stopping.validate()?;
    rule.validate()?;
    if m == 0 {
        return Err(Error::invalid("batch size must be at least 1"));
    }
    let set = problem.feasible_set();
    let mut x = checked_start(problem, options)?;
    let mut g = vec![0.0; x.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Logger::new(problem, stopping, options, m, seed);
    let clock = ThreadTime::now();
    let mut best = x.clone();
    let mut best_obj = problem.objective(&x);
    let mut sfo = 0u64;
    let mut done = 0u64;
    // cost of one batch, learned from the first call
    let mut batch_cost = m as u64;

    let first = log.log_value(0, 0, clock.elapsed(), best_obj, &best);
    let mut stop = gap_hit(first, stopping);
    while stop.is_none() {
        let k = done + 1;
        if let Some(r) = stopping.before_iteration(k, sfo, batch_cost, clock.elapsed()) {
            stop = Some(r);
            break;
        }
        batch_cost = problem.subgrad_batch_into(&x, m, &mut rng, &mut g);
        sfo += batch_cost;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite subgradient at iteration {k}")));
        }
        let step = rule.step(k);
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= step * gi;
        }
        set.project_in_place(&mut x)?;
        if let Some(tol) = options.feasibility_tol {
            check_feasible(problem, k, &[&x], tol)?;
        }
        done = k;
        if done.is_multiple_of(log.every) {
            track_best(problem, &x, &mut best, &mut best_obj);
            let row = log.log_value(done, sfo, clock.elapsed(), best_obj, &best);
            stop = gap_hit(row, stopping);
        }
    }
    let elapsed = clock.elapsed();
    if log.last_iter() != Some(done) {
        track_best(problem, &x, &mut best, &mut best_obj);
        log.log_value(done, sfo, elapsed, best_obj, &best);
    }
    Ok(RunOutcome {
        x: best,
        record: log.record,
        iterations: done,
        sfo_calls: sfo,
        stop: stop.expect("loop exits with a reason"),
        elapsed,
    })
}

fn track_best(problem: &dyn Problem, x: &[f64], best: &mut [f64], best_obj: &mut f64) {
    let obj = problem.objective(x);
    if obj < *best_obj {
        *best_obj = obj;
        best.copy_from_slice(x);
    }
}

/// Picks the step constant for `c / sqrt(k)` from `grid` by a pilot run
/// per candidate under `pilot`; lowest final objective wins, ties go to
/// the earlier candidate.
pub fn tune_subgrad_step(
    problem: &dyn Problem,
    grid: &[f64],
    m: usize,
    pilot: &StoppingPolicy,
    seed: u64,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::invalid("empty step grid"));
    }
    let mut best: Option<(f64, f64)> = None;
    let opts = RunOptions { log_every: Some(u64::MAX), ..Default::default() };
    for &c in grid {
        let out = subgrad_run(problem, StepRule::InvSqrtK(c), m, pilot, &opts, seed)?;
        let obj = out.record.last().map_or(f64::INFINITY, |r| r.objective);
        if best.is_none_or(|(_, b)| obj < b) {
            best = Some((c, obj));
        }
    }
    Ok(best.expect("grid is nonempty").0)
}
