//! Experiment driver: configuration, automatic parameter resolution
//! (variance, batch size, iteration limit, reference value), multi-seed
//! runs, summaries, and plot data. The `ssag` binary is a thin shell over
//! [`cli::main_with_args`].

mod batch;
pub mod cli;
pub mod config;
mod experiment;
mod plot;

pub use batch::select_batch_size;
pub use config::{parse_seeds, ExperimentConfig, ModeKind, ProblemKind, Setting, SolverKind};
pub use experiment::{
    build_problem, random_feasible_points, reference_value, resolve, resolve_batch_size, resolve_sigma_sq,
    run_experiment, run_seed, smoothing_mode, ExperimentReport, Resolved, SummaryRow, SummaryTable,
    SUMMARY_HEADER, WORKERS_ENV,
};
pub use plot::{average_curve, emit_plot_data, CurvePoint, PlotMode};

use crate::error::Error;

/// Process exit code for an error: 2 for configuration problems, 3 for
/// missing or unreadable data, 1 for everything else.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Data(_) | Error::Parse { .. } => 3,
        _ => 1,
    }
}
