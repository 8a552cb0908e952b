use thiserror::Error;

use crate::hilbert::HilbertSpace;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock truncation must keep at least one photon (n_max >= 1), got {0}")]
    InvalidTruncation(usize),

    #[error("operator spaces differ: n_max={left} vs n_max={right}")]
    SpaceMismatch { left: usize, right: usize },

    #[error("matrix shape {rows}x{cols} does not match space dimension {dim}")]
    ShapeMismatch { rows: usize, cols: usize, dim: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("steady state is not unique: two smallest singular values {smallest:e}, {second:e}")]
    NonUniqueSteadyState { smallest: f64, second: f64 },

    #[error("steady-state residual {0:e} exceeds 1e-9")]
    ResidualTooLarge(f64),

    #[error("RK4 step unstable: trace drift {drift:e} near t={time}")]
    StepUnstable { time: f64, drift: f64 },

    #[error("Fock truncation did not converge below n_max={0}")]
    NoConvergence(usize),

    #[error("two-qubit state has trace {0}, expected 1")]
    TraceNotUnity(f64),

    #[error("density matrix eigenvalue {0:e} is below the clamping threshold")]
    NotPositive(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
}

impl Error {
    pub(crate) fn space_mismatch(left: HilbertSpace, right: HilbertSpace) -> Self {
        Error::SpaceMismatch { left: left.n_max(), right: right.n_max() }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonUniqueSteadyState { .. }
                | Error::ResidualTooLarge(_)
                | Error::StepUnstable { .. }
                | Error::NoConvergence(_)
                | Error::NotPositive(_)
                | Error::TraceNotUnity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
