//! SSAG on `max(x1, x2, 0.3 - x1 - x2)` over the simplex, diminishing and
//! fixed smoothing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssag::harness::random_feasible_points;
use ssag::problems::SyntheticMax;
use ssag::smoothing::estimate_sigma_sq;
use ssag::smoothing::SmoothedOracle;
use ssag::solver::{iteration_limit, ssag_run, RunOptions, ScheduleState, SmoothingMode, StoppingPolicy};

fn main() -> ssag::Result<()> {
    let p = SyntheticMax::piecewise_linear_2d();
    let eps = 0.05;
    let kappa = p.params().kappa;
    let pts = random_feasible_points(&p, 50, 0)?;
    let sigma_sq = estimate_sigma_sq(&p, &pts, 1.0, 500, &mut ChaCha8Rng::seed_from_u64(1))?;
    let n = iteration_limit(eps, kappa, 1.0, sigma_sq.sqrt(), 1)?;
    println!("sigma^2 ~ {sigma_sq:.3}, N = {n}");

    for mode in [SmoothingMode::Diminishing, SmoothingMode::Fixed(eps / (4.0 * kappa))] {
        let sched = ScheduleState::new(1.0, 1, mode, p.params())?;
        let opts = RunOptions { log_every: Some(n / 5), ..Default::default() };
        let out = ssag_run(&p, sched, &StoppingPolicy::iterations(n), &opts, 7)?;
        println!("{mode:?}");
        for r in &out.record.rows {
            println!("  iter {:>6}  sfo {:>6}  objective {:.5}", r.iter, r.sfo_calls, r.objective);
        }
        println!("  x = {:.4?} (optimum (0.5, 0.5), value 0.5)", out.x);
    }
    Ok(())
}
