//! The accelerated smoothing solver, its schedules, and the projected
//! subgradient baseline.

mod record;
mod schedule;
mod ssag;
mod stopping;
mod subgrad;

pub use record::{RunRecord, RunRow};
pub use schedule::{initial_beta, iteration_limit, next_alpha, next_beta, ScheduleState, SmoothingMode};
pub use ssag::{ssag_run, RunOptions, RunOutcome};
pub use stopping::{StopReason, StoppingPolicy};
pub use subgrad::{subgrad_run, tune_subgrad_step, StepRule};
