//! One run of the stochastic smoothing accelerated gradient method:
//!
//! ```text
//! x_k = alpha_{k-1} z_{k-1} + (1 - alpha_{k-1}) y_{k-1}
//! g   = mean of m stochastic gradients of f + h~_{mu_k} at x_k
//! y_k = P_X(x_k - g / beta_k)
//! z_k = P_X(z_{k-1} - g / theta_k)
//! ```

use std::time::Duration;

use cpu_time::ThreadTime;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{RunRecord, RunRow, ScheduleState, StopReason, StoppingPolicy};
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::projection::FEAS_TOL;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Start point; the problem's default when absent.
    pub start: Option<Vec<f64>>,
    /// Log every this many iterations; `horizon / 200` when absent.
    pub log_every: Option<u64>,
    /// Fill `cpu_seconds` in the record.
    pub record_timing: bool,
    /// Record label; the problem name when empty.
    pub label: String,
    /// Abort if any iterate leaves the feasible set by more than this.
    pub feasibility_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Final output iterate.
    pub x: Vec<f64>,
    pub record: RunRecord,
    pub iterations: u64,
    pub sfo_calls: u64,
    pub stop: StopReason,
    pub elapsed: Duration,
}

pub(crate) struct Logger<'a> {
    problem: &'a dyn Problem,
    reference: Option<f64>,
    record_timing: bool,
    pub(crate) every: u64,
    pub(crate) record: RunRecord,
}

impl<'a> Logger<'a> {
    pub(crate) fn new(problem: &'a dyn Problem, stopping: &StoppingPolicy, options: &RunOptions, m: usize, seed: u64) -> Self {
        let label = if options.label.is_empty() { problem.name().to_string() } else { options.label.clone() };
        Logger {
            problem,
            reference: stopping.reference,
            record_timing: options.record_timing,
            every: options.log_every.unwrap_or_else(|| (stopping.horizon(m) / 200).max(1)).max(1),
            record: RunRecord::new(label, seed),
        }
    }

    pub(crate) fn log(&mut self, iter: u64, sfo: u64, elapsed: Duration, x: &[f64]) -> &RunRow {
        let objective = self.problem.objective(x);
        self.log_value(iter, sfo, elapsed, objective, x)
    }

    pub(crate) fn log_value(&mut self, iter: u64, sfo: u64, elapsed: Duration, objective: f64, x: &[f64]) -> &RunRow {
        self.record.rows.push(RunRow {
            iter,
            sfo_calls: sfo,
            cpu_seconds: self.record_timing.then_some(elapsed.as_secs_f64()),
            objective,
            gap: self.reference.map(|r| objective - r),
            accuracy: self.problem.accuracy(x),
        });
        self.record.rows.last().expect("row just pushed")
    }

    pub(crate) fn last_iter(&self) -> Option<u64> {
        self.record.rows.last().map(|r| r.iter)
    }
}

pub(crate) fn checked_start(problem: &dyn Problem, options: &RunOptions) -> Result<Vec<f64>> {
    let start = options.start.clone().unwrap_or_else(|| problem.initial_point());
    if start.len() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), got: start.len() });
    }
    let violation = problem.feasible_set().violation(&start);
    if !(violation <= FEAS_TOL) {
        return Err(Error::InfeasibleStart { violation });
    }
    Ok(start)
}

/// Runs the method from the schedule's current state until `stopping`
/// fires, logging the true objective of `y_k` at the chosen cadence, at
/// `k = 0` and at the last iteration.
pub fn ssag_run(
    problem: &dyn Problem,
    schedule: ScheduleState,
    stopping: &StoppingPolicy,
    options: &RunOptions,
    seed: u64,
) -> Result<RunOutcome> {
    stopping.validate()?;
    let set = problem.feasible_set();
    let mut y = checked_start(problem, options)?;
    let mut z = y.clone();
    let mut x = vec![0.0; y.len()];
    let mut g = vec![0.0; y.len()];
    let mut s = schedule;
    let m = s.m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Logger::new(problem, stopping, options, m, seed);
    let clock = ThreadTime::now();
    let mut sfo = 0u64;
    let mut done = 0u64;

    let first = log.log(0, 0, clock.elapsed(), &y);
    let mut stop = gap_hit(first, stopping);
    while stop.is_none() {
        if let Some(r) = stopping.before_iteration(s.k, sfo, m as u64, clock.elapsed()) {
            stop = Some(r);
            break;
        }
        s.check()?;
        let a = s.alpha_prev;
        for ((xi, zi), yi) in x.iter_mut().zip(&z).zip(&y) {
            *xi = a * zi + (1.0 - a) * yi;
        }
        problem.minibatch_into(&x, s.mu_k, m, &mut rng, &mut g);
        sfo += m as u64;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite gradient at iteration {}", s.k)));
        }
        for ((yi, xi), gi) in y.iter_mut().zip(&x).zip(&g) {
            *yi = xi - gi / s.beta_k;
        }
        set.project_in_place(&mut y)?;
        for (zi, gi) in z.iter_mut().zip(&g) {
            *zi -= gi / s.theta_k;
        }
        set.project_in_place(&mut z)?;
        if let Some(tol) = options.feasibility_tol {
            check_feasible(problem, s.k, &[&x, &y, &z], tol)?;
        }
        done = s.k;
        if done.is_multiple_of(log.every) {
            let row = log.log(done, sfo, clock.elapsed(), &y);
            stop = gap_hit(row, stopping);
        }
        s.advance();
    }
    let elapsed = clock.elapsed();
    if log.last_iter() != Some(done) {
        log.log(done, sfo, elapsed, &y);
    }
    Ok(RunOutcome {
        x: y,
        record: log.record,
        iterations: done,
        sfo_calls: sfo,
        stop: stop.expect("loop exits with a reason"),
        elapsed,
    })
}

pub(crate) fn check_feasible(problem: &dyn Problem, k: u64, iterates: &[&[f64]], tol: f64) -> Result<()> {
    for v in iterates {
        let violation = problem.feasible_set().violation(v);
        if !(violation <= tol) {
            return Err(Error::Numeric(format!("iterate left the feasible set at iteration {k} (violation {violation:e})")));
        }
    }
    Ok(())
}

pub(crate) fn gap_hit(row: &RunRow, stopping: &StoppingPolicy) -> Option<StopReason> {
    match (stopping.epsilon_gap, row.gap) {
        (Some(e), Some(g)) if g <= e => Some(StopReason::GapReached),
        _ => None,
    }
}
