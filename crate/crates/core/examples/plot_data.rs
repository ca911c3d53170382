//! Average several run records into a plot-ready curve.

use ssag::harness::{emit_plot_data, PlotMode};
use ssag::problems::SyntheticMax;
use ssag::smoothing::SmoothedOracle;
use ssag::solver::{ssag_run, RunOptions, ScheduleState, SmoothingMode, StoppingPolicy};

fn main() -> ssag::Result<()> {
    let p = SyntheticMax::random(20, 5, 0)?;
    let opts = RunOptions { log_every: Some(100), ..Default::default() };
    let records = (0..5)
        .map(|seed| {
            let sched = ScheduleState::new(1.0, 1, SmoothingMode::Diminishing, p.params())?;
            Ok(ssag_run(&p, sched, &StoppingPolicy::iterations(1000), &opts, seed)?.record)
        })
        .collect::<ssag::Result<Vec<_>>>()?;
    print!("{}", emit_plot_data(&records, PlotMode::ObjVsSfo)?);
    Ok(())
}
