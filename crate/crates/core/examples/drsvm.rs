//! Distributionally robust SVM on a separable 2-D dataset: SSAG against the
//! tuned subgradient baseline.

use ssag::data::{split_train_test, synthetic::separable_2d};
use ssag::problems::{DrsvmInstance, DrsvmOptions, Problem};
use ssag::smoothing::SmoothedOracle;
use ssag::solver::{ssag_run, subgrad_run, tune_subgrad_step, RunOptions, ScheduleState, SmoothingMode, StepRule, StoppingPolicy};

fn main() -> ssag::Result<()> {
    let data = separable_2d(400, 0.2, 0)?;
    let (train, test) = split_train_test(&data, 0.5, 0)?;
    let p = DrsvmInstance::new(&train, DrsvmOptions::default(), Some(test))?;
    println!("{} train samples, L_h = {:.3}", p.sample_count(), p.params().l_h);

    let budget = StoppingPolicy { max_sfo: Some(20_000), ..Default::default() };
    let opts = RunOptions { log_every: Some(2_000), ..Default::default() };

    let sched = ScheduleState::new(1.0, 4, SmoothingMode::Diminishing, p.params())?;
    let s = ssag_run(&p, sched, &budget, &opts, 0)?;
    let (w, lam) = s.x.split_at(p.n_features());
    println!("ssag:       objective {:.5}, test accuracy {:?}, w = {w:.3?}, lambda = {:.3}", p.objective(&s.x), p.accuracy(&s.x), lam[0]);

    let c = tune_subgrad_step(&p, &[0.01, 0.1, 1.0, 10.0, 100.0], 1, &StoppingPolicy::iterations(500), 0)?;
    let b = subgrad_run(&p, StepRule::InvSqrtK(c), 1, &budget, &opts, 0)?;
    println!("subgradient (c = {c}): objective {:.5}, test accuracy {:?}", p.objective(&b.x), p.accuracy(&b.x));
    Ok(())
}
