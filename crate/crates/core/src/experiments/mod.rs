//! Parameter sweeps, figure presets and post-processing of their results.

pub mod analysis;
pub mod csv;
pub mod dynamics;
pub mod presets;
pub mod sweep;

pub use analysis::{entanglement_boundary_check, BoundaryReport};
pub use dynamics::{fig5_dynamics, AtomSnapshot, DynamicsBundle, DynamicsSeries};
pub use presets::Preset;
pub use sweep::{
    ground_state, run_sweep, sentinel_check, sentinel_indices, Axis, SentinelReport, SweepMode,
    SweepParam, SweepResult, SweepRow, SweepSpec, Truncation, SENTINEL_TOLERANCE,
};
