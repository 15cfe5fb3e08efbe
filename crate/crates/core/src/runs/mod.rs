//! Runs and traces: clock evolution, run validation, bounded enumeration on a
//! time grid and the prefix order.

mod enumerate;
mod run;

pub use enumerate::{enumerate_levels, enumerate_runs, enumerate_runs_with_budget, DEFAULT_RUN_BUDGET};
pub use run::{
    advance_clocks, is_prefix, prefix_free, prefix_violation, run_violations, trace_of, validate_run, ClockTrace,
    Run, StepChecker, TimeGrid, Trace,
};
