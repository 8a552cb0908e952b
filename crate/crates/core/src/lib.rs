pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod solvers;
