use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::solver::{ssag_run, RunOptions, ScheduleState, SmoothingMode, StoppingPolicy};

/// Pilot-run batch-size selection.
///
/// Every candidate gets `pilots` seeded runs under the `pilot` budget
/// (typically a time cap). The candidate with the lowest mean final
/// objective wins; ties go to the smaller batch. A single candidate is
/// returned without running anything. Candidates whose pilots all fail are
/// skipped; if every candidate fails the last error is returned.
pub fn select_batch_size(
    problem: &dyn Problem,
    mu0: f64,
    mode: SmoothingMode,
    candidates: &[usize],
    pilot: &StoppingPolicy,
    pilots: usize,
    seed: u64,
) -> Result<usize> {
    let mut cands: Vec<usize> = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    match cands.as_slice() {
        [] => return Err(Error::invalid("no batch-size candidates")),
        [0, ..] => return Err(Error::invalid("batch size must be at least 1")),
        [only] => return Ok(*only),
        _ => {}
    }
    if pilots == 0 {
        return Err(Error::invalid("need at least one pilot per candidate"));
    }
    let opts = RunOptions { log_every: Some(u64::MAX), ..Default::default() };
    let jobs: Vec<(usize, u64)> = cands
        .iter()
        .flat_map(|&m| (0..pilots as u64).map(move |i| (m, seed.wrapping_add(i))))
        .collect();
    let finals: Vec<(usize, Result<f64>)> = jobs
        .par_iter()
        .map(|&(m, s)| {
            let run = ScheduleState::new(mu0, m, mode, problem.params())
                .and_then(|sched| ssag_run(problem, sched, pilot, &opts, s));
            let obj = run.and_then(|out| {
                let v = out.record.last().map_or(f64::NAN, |r| r.objective);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Numeric(format!("pilot with batch {m} ended at a non-finite objective")))
                }
            });
            (m, obj)
        })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    let mut last_err = None;
    for &m in &cands {
        let vals: Vec<f64> = finals
            .iter()
            .filter(|(c, _)| *c == m)
            .filter_map(|(_, r)| match r {
                Ok(v) => Some(*v),
                Err(e) => {
                    last_err = Some(e.to_string());
                    None
                }
            })
            .collect();
        if vals.is_empty() {
            continue;
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if best.is_none_or(|(_, b)| mean < b) {
            best = Some((m, mean));
        }
    }
    best.map(|(m, _)| m)
        .ok_or_else(|| Error::Numeric(format!("every pilot failed: {}", last_err.unwrap_or_default())))
}
