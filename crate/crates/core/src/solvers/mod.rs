//! Steady-state and time-domain solvers for the Lindblad generator.

mod evolve;
mod steady;
mod truncation;

pub use evolve::{evolve, evolve_with_substeps, substeps_per_output, Trajectory, TRACE_DRIFT_LIMIT};
pub use steady::{
    solve_steady, steady_state, SteadyStateResult, NULL_SPACE_TOLERANCE, RESIDUAL_TOLERANCE,
};
pub use truncation::{
    converge_truncation, TruncationHistory, TruncationLevel, CONVERGENCE_TOLERANCE,
    DEFAULT_SELECTION, MAX_TRUNCATION,
};
