//! Distributionally robust portfolio on synthetic returns.

use ssag::data::synthetic::gaussian_returns;
use ssag::problems::{DrpoInstance, DrpoOptions, DrpoPoint};
use ssag::smoothing::SmoothedOracle;
use ssag::solver::{ssag_run, RunOptions, ScheduleState, SmoothingMode, StoppingPolicy};

fn main() -> ssag::Result<()> {
    let table = gaussian_returns(250, 5, 3)?;
    let p = DrpoInstance::new(&table.returns, DrpoOptions::default())?;
    let (mean, _) = p.moments();
    println!("{} assets, {} scenarios, mean returns {:.5?}", p.n_assets(), p.n_scenarios(), mean.as_slice());

    let sched = ScheduleState::new(1.0, 10, SmoothingMode::Diminishing, p.params())?;
    let opts = RunOptions { log_every: Some(500), feasibility_tol: Some(1e-9), ..Default::default() };
    let out = ssag_run(&p, sched, &StoppingPolicy::iterations(3_000), &opts, 0)?;
    for r in &out.record.rows {
        println!("iter {:>5}  objective {:.5}", r.iter, r.objective);
    }
    let pt = DrpoPoint::unpack(&out.x, p.n_assets())?;
    println!("weights {:.4?}", pt.x);
    Ok(())
}
